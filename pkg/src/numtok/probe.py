"""Desk-scale learnability probes.

Replaces full language-model training with three gradient-checked
experiments: an identity-decode head that must read payload bits back out
of a random linear view (the decodability half of the robustness story), a
noise-robustness sweep across all encoding schemes, and a small operator
demo that trains an MLP to map operand encodings to the encoding of the
result. Everything runs on plain gradient descent with a fixed-size
(unit-normalized) step, no adaptive optimizer, in float64.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .encoders import (
    BitTokenConfig,
    FoNEConfig,
    NumberHeadParams,
    bittoken_decode_batch,
    bittoken_encode_batch,
    fone_decode,
    fone_encode,
    payload_to_probs,
    xval_decode,
    xval_encode,
)
from .metrics import exact_match
from .numcore import round_sig

NUM_LOSS_WEIGHT = 10.0  # number-loss weight in the composite training objective


@dataclass
class ProbeTask:
    kind: str = "identity_decode"  # or "operator_learn"
    scheme: str = "bittoken"
    operation: str = "add"
    train_size: int = 50_000
    eval_size: int = 2_000
    steps: int = 5_000
    seed: int = 7
    d_model: int = 256
    hidden: int = 512
    eta: float = 0.5
    batch: int = 512
    operand_range: tuple[int, int] = (0, 1000)

    def __post_init__(self):
        if self.kind not in ("identity_decode", "operator_learn"):
            raise ValueError(f"unknown probe kind {self.kind!r}")
        if self.scheme not in ("bittoken", "fone", "xval"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.operation not in ("add", "mult"):
            raise ValueError(f"unknown operation {self.operation!r}")
        if self.eval_size >= self.train_size:
            raise ValueError("eval set must be smaller than the train set")


@dataclass
class MLPParams:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    @classmethod
    def init(cls, n_in: int, n_hidden: int, n_out: int, rng: np.random.Generator) -> "MLPParams":
        # uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out))
        a1 = math.sqrt(6.0 / (n_in + n_hidden))
        a2 = math.sqrt(6.0 / (n_hidden + n_out))
        return cls(
            w1=rng.uniform(-a1, a1, (n_in, n_hidden)),
            b1=np.zeros(n_hidden),
            w2=rng.uniform(-a2, a2, (n_hidden, n_out)),
            b2=np.zeros(n_out),
        )

    def tensors(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2]


@dataclass
class ProbeReport:
    task: str
    scheme: str
    steps: int
    final_loss: float
    bit_accuracy: float | None
    exact_decode_rate: float | None
    seed: int
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {
            "task": self.task,
            "scheme": self.scheme,
            "steps": self.steps,
            "final_loss": self.final_loss,
            "bit_accuracy": self.bit_accuracy,
            "exact_decode_rate": self.exact_decode_rate,
            "seed": self.seed,
        }
        doc.update(self.extra)
        return json.dumps(doc, indent=2)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def _bce_mean(z: np.ndarray, t: np.ndarray) -> float:
    # stable log(1 + exp(-|z|)) + max(z, 0) - z*t
    loss = np.logaddexp(0.0, -np.abs(z)) + np.maximum(z, 0.0) - z * t
    return float(loss.mean())


def _gd_step(tensors: list[np.ndarray], grads: list[np.ndarray], eta: float) -> None:
    """Fixed-size step along the unit-normalized gradient direction."""
    norm = math.sqrt(sum(float((g * g).sum()) for g in grads))
    if norm == 0.0 or not math.isfinite(norm):
        return
    s = eta / norm
    for p, g in zip(tensors, grads):
        p -= s * g


# ---------------------------------------------------------------------------
# forward/backward passes


def mlp_forward(params: MLPParams, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pre = x @ params.w1 + params.b1
    h = np.maximum(pre, 0.0)
    return h @ params.w2 + params.b2, pre


def mlp_loss_grads(
    params: MLPParams, x: np.ndarray, t: np.ndarray, loss_kind: str
) -> tuple[float, list[np.ndarray]]:
    """Composite number loss (weight 10) and gradients for all four tensors."""
    out, pre = mlp_forward(params, x)
    h = np.maximum(pre, 0.0)
    n = out.size
    if loss_kind == "bce":
        p = _sigmoid(out)
        loss = NUM_LOSS_WEIGHT * _bce_mean(out, t)
        dout = NUM_LOSS_WEIGHT * (p - t) / n
    elif loss_kind == "mse":
        diff = out - t
        loss = NUM_LOSS_WEIGHT * float((diff * diff).mean())
        dout = NUM_LOSS_WEIGHT * 2.0 * diff / n
    else:
        raise ValueError(f"unknown loss {loss_kind!r}")
    if not math.isfinite(loss):
        raise FloatingPointError(f"non-finite loss {loss}")
    dw2 = h.T @ dout
    db2 = dout.sum(axis=0)
    dh = dout @ params.w2.T
    dh[pre <= 0.0] = 0.0
    dw1 = x.T @ dh
    db1 = dh.sum(axis=0)
    return loss, [dw1, db1, dw2, db2]


def head_loss_grads(
    head: NumberHeadParams, hidden: np.ndarray, bits: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    """BCE through the linear-plus-sigmoid number head."""
    z = hidden @ head.weight + head.bias
    p = _sigmoid(z)
    loss = _bce_mean(z, bits)
    if not math.isfinite(loss):
        raise FloatingPointError(f"non-finite loss {loss}")
    dz = (p - bits) / z.size
    return loss, [hidden.T @ dz, dz.sum(axis=0)]


def gradcheck(
    params: MLPParams | NumberHeadParams,
    batch: tuple[np.ndarray, np.ndarray],
    loss_kind: str = "bce",
    h: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-finite-difference grads."""
    x, t = batch
    if isinstance(params, NumberHeadParams):
        tensors = [np.array(params.weight), np.array(params.bias)]

        def loss_of(ts):
            z = x @ ts[0] + ts[1]
            return _bce_mean(z, t)

        _, grads = head_loss_grads(NumberHeadParams(tensors[0], tensors[1]), x, t)
    else:
        tensors = params.tensors()

        def loss_of(ts):
            p = MLPParams(*ts)
            out, _ = mlp_forward(p, x)
            if loss_kind == "bce":
                return NUM_LOSS_WEIGHT * _bce_mean(out, t)
            return NUM_LOSS_WEIGHT * float(((out - t) ** 2).mean())

        _, grads = mlp_loss_grads(params, x, t, loss_kind)

    worst = 0.0
    for ti, grad in enumerate(grads):
        flat = tensors[ti].ravel()
        gflat = grad.ravel()
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + h
            up = loss_of(tensors)
            flat[i] = keep - h
            dn = loss_of(tensors)
            flat[i] = keep
            num = (up - dn) / (2.0 * h)
            denom = max(abs(num) + abs(gflat[i]), 1e-8)
            worst = max(worst, abs(num - gflat[i]) / denom)
    return worst


# ---------------------------------------------------------------------------
# identity-decode head


def _random_payloads(rng: np.random.Generator, n: int, cfg: BitTokenConfig) -> np.ndarray:
    us = rng.integers(0, 2**64, size=n, dtype=np.uint64)
    return bittoken_encode_batch(us.view(np.float64), cfg)


def train_identity_head(cfg: ProbeTask) -> ProbeReport:
    """Full-batch GD on BCE: recover payload bits from a fixed random
    orthogonal projection plus a constant token vector.

    Deterministic for a fixed seed; stops as soon as held-out bit accuracy
    reaches 100%.
    """
    if cfg.scheme != "bittoken":
        raise ValueError("identity decode probes the bit-payload scheme")
    rng = np.random.default_rng(cfg.seed)
    enc_cfg = BitTokenConfig(d_model=cfg.d_model)
    nb = enc_cfg.payload_width

    payload = _random_payloads(rng, cfg.train_size + cfg.eval_size, enc_cfg)
    bits = (payload + 1.0) / 2.0
    q, _ = np.linalg.qr(rng.normal(size=(cfg.d_model, nb)))
    token = rng.normal(size=cfg.d_model)
    hidden = payload @ q.T + token
    hidden -= hidden[: cfg.train_size].mean(axis=0)

    htr, hev = hidden[: cfg.train_size], hidden[cfg.train_size :]
    ttr, tev = bits[: cfg.train_size], bits[cfg.train_size :]

    w = np.zeros((cfg.d_model, nb))
    b = np.zeros(nb)
    loss = math.inf
    steps_used = 0
    accuracy = 0.0
    for step in range(1, cfg.steps + 1):
        loss, grads = head_loss_grads(NumberHeadParams(w, b), htr, ttr)
        _gd_step([w, b], grads, cfg.eta)
        steps_used = step
        if step % 10 == 0 or step == cfg.steps:
            accuracy = float(np.mean(((hev @ w + b) >= 0.0) == (tev >= 0.5)))
            if accuracy == 1.0:
                break
    probs = _sigmoid(hev @ w + b)
    decoded = bittoken_decode_batch(probs, enc_cfg)
    originals = bittoken_decode_batch(payload_to_probs(payload[cfg.train_size :]), enc_cfg)
    exact = float(np.mean(decoded.view(np.uint64) == originals.view(np.uint64)))
    return ProbeReport(
        task="identity_decode",
        scheme="bittoken",
        steps=steps_used,
        final_loss=loss,
        bit_accuracy=accuracy,
        exact_decode_rate=exact,
        seed=cfg.seed,
        extra={"d_model": cfg.d_model, "train_size": cfg.train_size, "eval_size": cfg.eval_size},
    )


# ---------------------------------------------------------------------------
# noise robustness


def _benchmark_values(rng: np.random.Generator, n: int, nonnegative: bool = False) -> np.ndarray:
    exps = rng.integers(-14, 15, size=n)
    lo = np.power(10.0, exps)
    vals = rng.uniform(lo, 10.0 * lo)
    vals = np.array([round_sig(float(v), 15) for v in vals])
    if not nonnegative:
        vals *= np.where(rng.integers(0, 2, size=n) == 0, 1.0, -1.0)
    return vals


def noise_sweep(
    scheme: str,
    sigmas: list[float],
    n: int = 10_000,
    seed: int = 13,
) -> dict[float, float]:
    """Fraction of values decoded exactly under additive uniform payload noise."""
    rng = np.random.default_rng(seed)
    out: dict[float, float] = {}
    if scheme == "bittoken":
        cfg = BitTokenConfig()
        values = _benchmark_values(rng, n)
        payload = bittoken_encode_batch(values, cfg)
        probs = payload_to_probs(payload)
        for sigma in sigmas:
            noisy = probs + rng.uniform(-sigma, sigma, probs.shape)
            decoded = bittoken_decode_batch(np.clip(noisy, 0.0, 1.0), cfg)
            out[sigma] = float(np.mean(decoded.view(np.uint64) == values.view(np.uint64)))
    elif scheme == "fone":
        cfg = FoNEConfig()
        values = _benchmark_values(rng, n, nonnegative=True)
        payloads = np.stack([fone_encode(float(v), cfg).values[: cfg.payload_width] for v in values])
        for sigma in sigmas:
            noisy = payloads + rng.uniform(-sigma, sigma, payloads.shape)
            hits = sum(
                fone_decode(noisy[i], cfg) == float(values[i]) for i in range(len(values))
            )
            out[sigma] = hits / len(values)
    elif scheme == "xval":
        values = _benchmark_values(rng, n)
        scalars = np.array([xval_encode(float(v)) for v in values])
        for sigma in sigmas:
            noisy = np.clip(scalars + rng.uniform(-sigma, sigma, scalars.shape), -5.0, 5.0)
            hits = sum(
                exact_match(repr(xval_decode(float(noisy[i]))), float(values[i]))
                for i in range(len(values))
            )
            out[sigma] = hits / len(values)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return out


# ---------------------------------------------------------------------------
# operator learnability


def _fone_config_for(cfg: ProbeTask) -> FoNEConfig:
    lo, hi = cfg.operand_range
    top = 2 * (hi - 1) if cfg.operation == "add" else (hi - 1) ** 2
    digits = len(str(max(top, 1)))
    return FoNEConfig(int_freqs=digits, frac_freqs=0, d_model=2 * digits)


def _apply_op(x: np.ndarray, y: np.ndarray, op: str) -> np.ndarray:
    return x + y if op == "add" else x * y


def operator_learn_demo(cfg: ProbeTask) -> ProbeReport:
    """Train an MLP to map (enc(x), enc(y)) to enc(x op y); report exact decode.

    Report-only for every combination except the sinusoidal-addition case,
    whose local solution is guaranteed by the additive homomorphism.
    """
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.operand_range
    n = cfg.train_size + cfg.eval_size
    xs = rng.integers(lo, hi, size=n)
    ys = rng.integers(lo, hi, size=n)
    results = _apply_op(xs, ys, cfg.operation)

    if cfg.scheme == "fone":
        fcfg = _fone_config_for(cfg)
        p = fcfg.payload_width

        def enc(vals):
            return np.stack([fone_encode(float(v), fcfg).values[:p] for v in vals])

        loss_kind = "mse"
        tgt = enc(results)
    elif cfg.scheme == "bittoken":
        bcfg = BitTokenConfig(d_model=BitTokenConfig().payload_width)
        p = bcfg.payload_width

        def enc(vals):
            return bittoken_encode_batch(np.asarray(vals, dtype=np.float64), bcfg)

        loss_kind = "bce"
        tgt = (enc(results) + 1.0) / 2.0
    else:
        raise ValueError("operator demo supports bittoken and fone")

    X = np.concatenate([enc(xs), enc(ys)], axis=1)
    xtr, xev = X[: cfg.train_size], X[cfg.train_size :]
    ttr = tgt[: cfg.train_size]
    eval_results = results[cfg.train_size :]

    params = MLPParams.init(2 * p, cfg.hidden, p, rng)
    loss = math.inf
    for _ in range(cfg.steps):
        idx = rng.integers(0, cfg.train_size, cfg.batch)
        loss, grads = mlp_loss_grads(params, xtr[idx], ttr[idx], loss_kind)
        _gd_step(params.tensors(), grads, cfg.eta)

    pred, _ = mlp_forward(params, xev)
    if cfg.scheme == "fone":
        hits = sum(
            fone_decode(pred[i], _fone_config_for(cfg)) == float(eval_results[i])
            for i in range(len(eval_results))
        )
        bit_acc = None
    else:
        probs = _sigmoid(pred)
        decoded = bittoken_decode_batch(probs, BitTokenConfig(d_model=128))
        hits = int(np.sum(decoded == eval_results.astype(np.float64)))
        bit_acc = float(np.mean((probs >= 0.5) == (tgt[cfg.train_size :] >= 0.5)))
    return ProbeReport(
        task=f"operator_{cfg.operation}",
        scheme=cfg.scheme,
        steps=cfg.steps,
        final_loss=loss,
        bit_accuracy=bit_acc,
        exact_decode_rate=hits / len(eval_results),
        seed=cfg.seed,
        extra={"operand_range": list(cfg.operand_range), "hidden": cfg.hidden},
    )
