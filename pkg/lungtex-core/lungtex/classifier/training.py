"""
训练：前向、反向、单步更新、早停与完整训练循环

INPUT:  DenseNetClassifier, PatchSet (train / validation), TrainConfig
OUTPUT: build_model(), forward(), backward(), make_optimizer(), train_step(), train(),
        history_to_frame() 函数, EarlyStopping, EpochRecord, TrainResult 类
POS:    classifier 的训练入口，被 hypersearch 与 CLI train 命令调用

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import copy
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import torch
import torch.nn.functional as F

from lungtex.atlas.patchset import PatchSet
from lungtex.classifier.config import ModelConfig, TrainConfig
from lungtex.classifier.network import DenseNetClassifier, to_network_input
from lungtex.classifier.preprocessing import augment, normalize_patch
from lungtex.config import get_config
from lungtex.errors import InputValidationError
from lungtex.mlflow.tracking import log_epoch_metrics
from lungtex.rng import stream, torch_generator

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ["epoch", "train_loss", "train_acc", "val_acc"]


# ============ 结果类型 ============

@dataclass(frozen=True)
class EpochRecord:
    """单个 epoch 的训练记录"""

    epoch: int
    train_loss: float
    train_acc: float
    val_acc: float


@dataclass
class TrainResult:
    """
    训练结果

    Attributes:
        model: 恢复为最佳验证准确率参数的模型
        history: 每个 epoch 的记录
        best_epoch: 最佳 epoch（从 1 开始）
        best_val_acc: 最佳验证准确率
        stopped_early: 是否因 patience 耗尽而停止
    """

    model: DenseNetClassifier
    history: List[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_val_acc: float = 0.0
    stopped_early: bool = False


# ============ 运行时设置 ============

def configure_torch_runtime() -> None:
    """固定算子线程数并启用确定性算法，使结果与工作线程池大小无关"""
    torch.set_num_threads(get_config().torch_num_threads)
    torch.use_deterministic_algorithms(True)


def build_model(config: ModelConfig, seed: int) -> DenseNetClassifier:
    """按配置构建模型，并用 "init" 随机流初始化参数"""
    model = DenseNetClassifier(config)
    model.initialize(torch_generator(seed, "init"))
    return model


def _model_dtype(model: DenseNetClassifier) -> torch.dtype:
    return next(model.parameters()).dtype


def _class_index(labels: np.ndarray) -> torch.Tensor:
    """纹理编码 1..5 -> 类别索引 0..4"""
    return torch.as_tensor(np.asarray(labels, dtype=np.int64) - 1)


# ============ 前向 / 反向 ============

def forward(model: DenseNetClassifier, batch: np.ndarray) -> np.ndarray:
    """
    推理模式前向传播（归一化层使用滑动统计量）。

    Args:
        model: 模型
        batch: 已归一化的 patch 批次 (B, *tensor_shape)

    Returns:
        (B, 5) float64 类别概率，每行和为 1

    Raises:
        InputValidationError: 批次形状与模型配置不符
    """
    x = to_network_input(batch, model.config, dtype=_model_dtype(model))
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            logits = model(x)
    finally:
        model.train(was_training)
    return torch.softmax(logits.double(), dim=1).numpy()


def backward(model: DenseNetClassifier, batch: np.ndarray, labels: Sequence[int]) -> Dict[str, np.ndarray]:
    """
    平均交叉熵损失对每个参数的梯度。

    归一化层使用当前批次统计量；调用前后模型的滑动统计量与模式保持不变。

    Args:
        model: 模型
        batch: 已归一化的 patch 批次
        labels: 纹理编码 (1..5)

    Returns:
        参数名 -> 梯度数组
    """
    x = to_network_input(batch, model.config, dtype=_model_dtype(model))
    target = _class_index(np.asarray(labels))
    buffers = {name: buf.detach().clone() for name, buf in model.named_buffers()}
    was_training = model.training

    model.train()
    model.zero_grad(set_to_none=True)
    try:
        loss = F.cross_entropy(model(x), target)
        loss.backward()
        grads = {
            name: param.grad.detach().numpy().copy()
            for name, param in model.named_parameters()
            if param.grad is not None
        }
    finally:
        model.zero_grad(set_to_none=True)
        with torch.no_grad():
            for name, buf in model.named_buffers():
                buf.copy_(buffers[name])
        model.train(was_training)
    return grads


def make_optimizer(model: DenseNetClassifier, cfg: TrainConfig) -> torch.optim.Optimizer:
    """带动量的随机梯度下降"""
    return torch.optim.SGD(model.parameters(), lr=cfg.learning_rate, momentum=cfg.momentum)


def train_step(
    model: DenseNetClassifier,
    optimizer: torch.optim.Optimizer,
    batch: np.ndarray,
    labels: Sequence[int],
) -> tuple:
    """
    一次参数更新。

    Returns:
        (loss, 正确数)，均在更新前按当前批次计算
    """
    x = to_network_input(batch, model.config, dtype=_model_dtype(model))
    target = _class_index(np.asarray(labels))
    model.train()
    optimizer.zero_grad(set_to_none=True)
    logits = model(x)
    loss = F.cross_entropy(logits, target)
    loss.backward()
    optimizer.step()
    correct = int((logits.argmax(dim=1) == target).sum())
    return float(loss.detach()), correct


# ============ 早停 ============

class EarlyStopping:
    """
    验证准确率早停：严格提升才更新最佳 epoch，
    当前 epoch 与最佳 epoch 相差达到 patience 时停止。
    """

    def __init__(self, patience: int):
        self.patience = patience
        self.best_epoch = 0
        self.best_score = -np.inf

    def update(self, epoch: int, score: float) -> bool:
        """
        记录一个 epoch 的分数。

        Returns:
            本 epoch 是否为新的最佳
        """
        if score > self.best_score:
            self.best_score = score
            self.best_epoch = epoch
            return True
        return False

    def should_stop(self, epoch: int) -> bool:
        return epoch - self.best_epoch >= self.patience


# ============ 训练循环 ============

def _batch_bounds(n: int, batch_size: int) -> List[tuple]:
    """批次边界；末尾仅剩 1 个样本时并入前一批（训练模式归一化需要 >1 个样本）"""
    bounds = [(start, min(start + batch_size, n)) for start in range(0, n, batch_size)]
    if len(bounds) > 1 and bounds[-1][1] - bounds[-1][0] == 1:
        last = bounds.pop()
        bounds[-1] = (bounds[-1][0], last[1])
    return bounds


def _accuracy(model: DenseNetClassifier, tensors: np.ndarray, labels: np.ndarray, batch_size: int) -> float:
    correct = 0
    for start, stop in _batch_bounds(len(tensors), batch_size):
        probs = forward(model, tensors[start:stop])
        correct += int((probs.argmax(axis=1) + 1 == labels[start:stop]).sum())
    return correct / len(tensors)


def _check_sets(train_set: PatchSet, val_set: PatchSet) -> None:
    if len(train_set) == 0:
        raise InputValidationError("训练集为空")
    if len(val_set) == 0:
        raise InputValidationError("验证集为空")
    overlap = set(train_set.scan_set) & set(val_set.scan_set)
    if overlap:
        raise InputValidationError(f"训练集与验证集来自相同扫描: {sorted(overlap)}")


def train(
    model: DenseNetClassifier,
    train_set: PatchSet,
    val_set: PatchSet,
    cfg: TrainConfig,
    train_labels: Optional[np.ndarray] = None,
) -> TrainResult:
    """
    训练模型直到 patience 耗尽或达到 max_epochs，返回最佳验证准确率对应的参数。

    每个 epoch：用 ("shuffle", epoch) 流打乱，用 ("augment", epoch) 流逐样本增强，
    按批做 SGD 更新，然后在验证集上计算准确率。

    Args:
        model: 已初始化的模型（原地训练）
        train_set: 训练 PatchSet
        val_set: 验证 PatchSet，扫描来源必须与训练集不相交
        cfg: 训练配置
        train_labels: 替代训练标签（阴性对照用），默认为 train_set.labels

    Returns:
        TrainResult

    Raises:
        InputValidationError: 空集、扫描来源重叠或 patch 形状不符
    """
    _check_sets(train_set, val_set)
    configure_torch_runtime()
    dimensionality = model.config.dimensionality

    train_x = normalize_patch(train_set.tensors)
    train_y = np.asarray(train_set.labels if train_labels is None else train_labels, dtype=np.int64)
    if len(train_y) != len(train_x):
        raise InputValidationError("替代训练标签数量与训练集不符")
    val_x = normalize_patch(val_set.tensors)
    val_y = np.asarray(val_set.labels, dtype=np.int64)

    optimizer = make_optimizer(model, cfg)
    stopper = EarlyStopping(cfg.patience_epochs)
    result = TrainResult(model=model)
    best_state = copy.deepcopy(model.state_dict())
    n = len(train_x)

    logger.info(
        f"开始训练: {n} 个训练 patch / {len(val_x)} 个验证 patch, "
        f"batch={cfg.batch_size}, max_epochs={cfg.max_epochs}, patience={cfg.patience_epochs}"
    )

    for epoch in range(1, cfg.max_epochs + 1):
        order = stream(cfg.rng_seed, "shuffle", epoch).permutation(n)
        aug_rng = stream(cfg.rng_seed, "augment", epoch)
        epoch_x = train_x[order]
        if cfg.augment.enabled:
            epoch_x = np.stack([augment(t, cfg.augment, aug_rng, dimensionality) for t in epoch_x])
        epoch_y = train_y[order]

        loss_sum, correct = 0.0, 0
        for start, stop in _batch_bounds(n, cfg.batch_size):
            loss, hits = train_step(model, optimizer, epoch_x[start:stop], epoch_y[start:stop])
            loss_sum += loss * (stop - start)
            correct += hits

        val_acc = _accuracy(model, val_x, val_y, cfg.batch_size)
        record = EpochRecord(epoch, loss_sum / n, correct / n, val_acc)
        result.history.append(record)
        log_epoch_metrics(epoch, {"train_loss": record.train_loss, "train_acc": record.train_acc, "val_acc": val_acc})
        logger.debug(
            f"epoch {epoch}: loss={record.train_loss:.4f} train_acc={record.train_acc:.4f} val_acc={val_acc:.4f}"
        )

        if stopper.update(epoch, val_acc):
            best_state = copy.deepcopy(model.state_dict())
        if stopper.should_stop(epoch):
            result.stopped_early = True
            logger.info(f"验证准确率 {cfg.patience_epochs} 个 epoch 未提升，于 epoch {epoch} 停止")
            break

    model.load_state_dict(best_state)
    model.eval()
    result.best_epoch = stopper.best_epoch
    result.best_val_acc = float(stopper.best_score)
    logger.info(f"训练完成: best_epoch={result.best_epoch}, best_val_acc={result.best_val_acc:.4f}")
    return result


def history_to_frame(history: Sequence[EpochRecord]) -> pd.DataFrame:
    """训练历史 -> DataFrame (epoch, train_loss, train_acc, val_acc)"""
    return pd.DataFrame(
        [[r.epoch, r.train_loss, r.train_acc, r.val_acc] for r in history],
        columns=HISTORY_COLUMNS,
    )
