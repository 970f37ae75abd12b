"""LSTM-FC meta-initializer: learns warm-start parameter vectors from
optimization-trace features.

One recurrent cell plus a fully connected head sized to a fixed maximum
parameter dimension D_max serve every task: feature vectors zero-pad the
parameter-delta block up to D_max, and predictions use only the leading
``n_params`` components. Inference unrolls the cell K times, feeding back
the simulator energy of the current guess at each step, so one prediction
costs exactly K energy evaluations.

Training minimizes the cumulative unrolled energy sum_k E(theta_k) averaged
over tasks. The loss depends on the weights only through parameter vectors
and energy *values*, so reverse accumulation over the unroll needs just
first derivatives of E (supplied by the parameter-shift rule); no Hessian
of the quantum objective ever appears.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from .ansatz import AnsatzProgram, parameter_shift_gradient, run_program_raw
from .errors import (
    CapacityError,
    ModelFormatError,
    ShapeMismatchError,
    TrainingFailure,
    ValidationError,
)
from .pauli import PauliSum
from .parallel import parallel_map, resolve_threads
from .statevector import expectation_raw

_MAGIC = b"VQEMETA\x00"
_VERSION = 1


@dataclass
class MetaLearner:
    """LSTM cell weights plus FC projection to a fixed output width.

    Gate layout in the stacked matrices is [input, forget, cell, output]
    along the first axis. ``energy_scale`` is the minimum feature scale;
    the per-task scale is max(energy_scale, |E(theta=0)|) so chemistry-sized
    energies do not saturate the gates.
    """

    hidden_dim: int
    d_max: int
    w_x: np.ndarray
    w_h: np.ndarray
    bias: np.ndarray
    w_fc: np.ndarray
    b_fc: np.ndarray
    energy_scale: float = 1.0

    @property
    def input_dim(self) -> int:
        return 1 + self.d_max

    def __post_init__(self):
        h, d = self.hidden_dim, self.d_max
        if h < 1 or d < 1:
            raise ValidationError("hidden_dim and d_max must be >= 1")
        if self.energy_scale <= 0:
            raise ValidationError("energy_scale must be positive")
        expected = {
            "w_x": (4 * h, 1 + d),
            "w_h": (4 * h, h),
            "bias": (4 * h,),
            "w_fc": (d, h),
            "b_fc": (d,),
        }
        for name, shape in expected.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ShapeMismatchError(f"{name} has shape {arr.shape}, expected {shape}")


def init_meta_learner(d_max: int, hidden_dim: int = 64, seed: int = 0,
                      energy_scale: float = 1.0) -> MetaLearner:
    """Fresh model: uniform [-0.08, 0.08] weights, forget-gate bias +1."""
    rng = np.random.default_rng(seed)
    h = hidden_dim

    def u(*shape):
        return rng.uniform(-0.08, 0.08, shape)

    bias = u(4 * h)
    bias[h : 2 * h] += 1.0
    return MetaLearner(
        hidden_dim, d_max, u(4 * h, 1 + d_max), u(4 * h, h), bias,
        u(d_max, h), u(d_max), energy_scale,
    )


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def lstm_step(m: MetaLearner, x: np.ndarray, state: tuple[np.ndarray, np.ndarray]
              ) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray]]:
    """Standard cell: sigmoid gates, tanh candidate and output squashing."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (m.input_dim,):
        raise ShapeMismatchError(f"input has shape {x.shape}, expected ({m.input_dim},)")
    h_prev, c_prev = state
    hd = m.hidden_dim
    pre = m.w_x @ x + m.w_h @ h_prev + m.bias
    i = _sigmoid(pre[:hd])
    f = _sigmoid(pre[hd : 2 * hd])
    g = np.tanh(pre[2 * hd : 3 * hd])
    o = _sigmoid(pre[3 * hd :])
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return h, (h, c)


def zero_state_pair(m: MetaLearner) -> tuple[np.ndarray, np.ndarray]:
    return np.zeros(m.hidden_dim), np.zeros(m.hidden_dim)


def pad_features(theta_delta: np.ndarray, energy: float, m: MetaLearner,
                 energy_scale: float | None = None) -> np.ndarray:
    """[energy/scale, theta_delta zero-padded to d_max]."""
    theta_delta = np.asarray(theta_delta, dtype=np.float64)
    if theta_delta.shape[0] > m.d_max:
        raise CapacityError(
            f"{theta_delta.shape[0]} parameter deltas exceed d_max = {m.d_max}"
        )
    x = np.zeros(m.input_dim)
    x[0] = energy / (energy_scale if energy_scale is not None else m.energy_scale)
    x[1 : 1 + theta_delta.shape[0]] = theta_delta
    return x


def fc_project(m: MetaLearner, h: np.ndarray) -> np.ndarray:
    """Full d_max-length head output; callers slice the prefix they need."""
    return m.w_fc @ h + m.b_fc


@dataclass
class MetaTask:
    """One problem instance the learner trains on or predicts for."""

    hamiltonian: PauliSum
    ansatz: AnsatzProgram
    descriptor: str = ""

    @property
    def n_params(self) -> int:
        return self.ansatz.n_params

    def energy(self, theta: np.ndarray) -> float:
        return expectation_raw(self.hamiltonian, run_program_raw(self.ansatz, theta))


@dataclass
class EvalCounter:
    count: int = 0

    def tick(self):
        self.count += 1


UNROLLED = "unrolled"
SUPERVISED = "supervised"


@dataclass(frozen=True)
class TrainConfig:
    unroll_steps: int = 3
    epochs: int = 100
    meta_learning_rate: float = 1e-2
    batch_size: int = 0  # 0 = all tasks per update
    seed: int = 0
    threads: int | None = None
    objective: str = UNROLLED

    def __post_init__(self):
        if self.unroll_steps < 1:
            raise ValidationError("unroll_steps must be >= 1")
        if self.epochs < 0:
            raise ValidationError("epochs must be >= 0")
        if self.objective not in (UNROLLED, SUPERVISED):
            raise ValidationError(f"unknown training objective {self.objective!r}")


def _task_scale(m: MetaLearner, e0: float) -> float:
    return max(m.energy_scale, abs(e0))


def _unroll(m: MetaLearner, task: MetaTask, K: int, counter: EvalCounter | None):
    """Forward pass; returns (thetas, caches) with thetas[k] for k=0..K.

    Step k feeds [E(theta_{k-1})/scale, pad(theta_{k-1} - theta_{k-2})] into
    the cell and takes the first n_params components of the head as theta_k;
    theta_0 = theta_{-1} = 0, so exactly one energy evaluation happens per
    step.
    """
    n = task.n_params
    if n > m.d_max:
        raise CapacityError(f"task needs {n} parameters, model d_max = {m.d_max}")
    hd = m.hidden_dim
    h = np.zeros(hd)
    c = np.zeros(hd)
    thetas = [np.zeros(n)]
    energies = []
    caches = []
    scale = None
    for k in range(1, K + 1):
        e_prev = task.energy(thetas[k - 1])
        if counter is not None:
            counter.tick()
        energies.append(e_prev)
        if scale is None:
            scale = _task_scale(m, e_prev)
        delta = thetas[k - 1] - (thetas[k - 2] if k >= 2 else np.zeros(n))
        x = pad_features(delta, e_prev, m, energy_scale=scale)
        pre = m.w_x @ x + m.w_h @ h + m.bias
        i = _sigmoid(pre[:hd])
        f = _sigmoid(pre[hd : 2 * hd])
        g = np.tanh(pre[2 * hd : 3 * hd])
        o = _sigmoid(pre[3 * hd :])
        c_new = f * c + i * g
        h_new = o * np.tanh(c_new)
        theta_k = fc_project(m, h_new)[:n]
        caches.append(
            {"x": x, "i": i, "f": f, "g": g, "o": o,
             "c_prev": c.copy(), "c": c_new, "h_prev": h.copy(), "h": h_new}
        )
        h, c = h_new, c_new
        thetas.append(theta_k)
    return thetas, energies, caches, scale


def predict_init(m: MetaLearner, task: MetaTask, K: int = 3,
                 counter: EvalCounter | None = None) -> np.ndarray:
    """Warm-start parameter vector of length task.n_params after K unroll steps."""
    if K < 1:
        raise ValidationError("K must be >= 1")
    thetas, _, _, _ = _unroll(m, task, K, counter)
    return thetas[K]


_WEIGHT_FIELDS = ("w_x", "w_h", "bias", "w_fc", "b_fc")


def _pack(m: MetaLearner) -> np.ndarray:
    return np.concatenate([getattr(m, f).ravel() for f in _WEIGHT_FIELDS])


def _unpack(m: MetaLearner, vec: np.ndarray) -> MetaLearner:
    out = {}
    pos = 0
    for f in _WEIGHT_FIELDS:
        arr = getattr(m, f)
        out[f] = vec[pos : pos + arr.size].reshape(arr.shape).copy()
        pos += arr.size
    return replace(m, **out)


def _task_loss_and_grad(m: MetaLearner, task: MetaTask, K: int):
    """Cumulative unrolled energy and its exact gradient w.r.t. the weights.

    Parameter-shift energy gradients g(theta_k) enter as constants; the
    chain rule then runs backward through the FC head, the cell, and the
    (energy, delta) feature paths.
    """
    n = task.n_params
    hd = m.hidden_dim
    thetas, feat_energies, caches, scale = _unroll(m, task, K, None)
    loss = 0.0
    e_grads = [None] * (K + 1)
    for k in range(1, K + 1):
        loss += task.energy(thetas[k])
        e_grads[k] = parameter_shift_gradient(task.ansatz, task.hamiltonian, thetas[k])

    d = {f: np.zeros_like(getattr(m, f)) for f in _WEIGHT_FIELDS}
    dtheta = [np.zeros(n) for _ in range(K + 1)]
    for k in range(1, K + 1):
        dtheta[k] += e_grads[k]
    dh_next = np.zeros(hd)
    dc_next = np.zeros(hd)
    for k in range(K, 0, -1):
        cache = caches[k - 1]
        dfull = np.zeros(m.d_max)
        dfull[:n] = dtheta[k]
        d["w_fc"] += np.outer(dfull, cache["h"])
        d["b_fc"] += dfull
        dh = m.w_fc.T @ dfull + dh_next
        tc = np.tanh(cache["c"])
        do = dh * tc
        dc = dc_next + dh * cache["o"] * (1.0 - tc * tc)
        di = dc * cache["g"]
        dg = dc * cache["i"]
        df = dc * cache["c_prev"]
        dc_next = dc * cache["f"]
        dpre = np.concatenate([
            di * cache["i"] * (1.0 - cache["i"]),
            df * cache["f"] * (1.0 - cache["f"]),
            dg * (1.0 - cache["g"] ** 2),
            do * cache["o"] * (1.0 - cache["o"]),
        ])
        d["w_x"] += np.outer(dpre, cache["x"])
        d["w_h"] += np.outer(dpre, cache["h_prev"])
        d["bias"] += dpre
        dx = m.w_x.T @ dpre
        dh_next = m.w_h.T @ dpre
        if k >= 2:
            # feature paths: energy E(theta_{k-1}) and delta theta_{k-1}-theta_{k-2}
            dtheta[k - 1] += (dx[0] / scale) * e_grads[k - 1]
            dtheta[k - 1] += dx[1 : 1 + n]
            if k >= 3:
                dtheta[k - 2] -= dx[1 : 1 + n]
    grad_vec = np.concatenate([d[f].ravel() for f in _WEIGHT_FIELDS])
    return loss, grad_vec


def meta_loss(m: MetaLearner, tasks: list[MetaTask], K: int) -> float:
    """Mean over tasks of the cumulative unrolled energy (no gradients)."""
    total = 0.0
    for task in tasks:
        thetas, _, _, _ = _unroll(m, task, K, None)
        total += sum(task.energy(thetas[k]) for k in range(1, K + 1))
    return total / len(tasks)


@dataclass(frozen=True)
class TraceExample:
    """Supervised training pair: an observed optimization trace and the
    converged parameters it ended at."""

    energies: np.ndarray
    thetas: np.ndarray  # (steps, n_params), thetas[0] = starting point
    target: np.ndarray

    @classmethod
    def from_record(cls, record) -> TraceExample:
        thetas = np.stack(record.theta_trace)
        steps = thetas.shape[0]
        return cls(np.asarray(record.energies[:steps], dtype=np.float64),
                   thetas, np.asarray(record.final_theta, dtype=np.float64))


def _supervised_loss_and_grad(m: MetaLearner, ex: TraceExample, K: int):
    """Squared-error regression of the converged parameters from a trace
    prefix. Features are exogenous (read off the record, no feedback loop),
    so this is plain truncated BPTT."""
    n = ex.target.shape[0]
    if n > m.d_max:
        raise CapacityError(f"example needs {n} parameters, model d_max = {m.d_max}")
    hd = m.hidden_dim
    steps = min(K, ex.thetas.shape[0])
    scale = _task_scale(m, ex.energies[0])
    h = np.zeros(hd)
    c = np.zeros(hd)
    caches = []
    preds = []
    for k in range(steps):
        delta = ex.thetas[k] - (ex.thetas[k - 1] if k >= 1 else np.zeros(n))
        x = pad_features(delta, ex.energies[k], m, energy_scale=scale)
        pre = m.w_x @ x + m.w_h @ h + m.bias
        i = _sigmoid(pre[:hd])
        f = _sigmoid(pre[hd : 2 * hd])
        g = np.tanh(pre[2 * hd : 3 * hd])
        o = _sigmoid(pre[3 * hd :])
        c_new = f * c + i * g
        h_new = o * np.tanh(c_new)
        caches.append({"x": x, "i": i, "f": f, "g": g, "o": o,
                       "c_prev": c.copy(), "c": c_new, "h_prev": h.copy(), "h": h_new})
        preds.append(fc_project(m, h_new)[:n])
        h, c = h_new, c_new
    loss = sum(float(np.sum((p - ex.target) ** 2)) for p in preds) / steps

    d = {f: np.zeros_like(getattr(m, f)) for f in _WEIGHT_FIELDS}
    dh_next = np.zeros(hd)
    dc_next = np.zeros(hd)
    for k in range(steps - 1, -1, -1):
        cache = caches[k]
        dfull = np.zeros(m.d_max)
        dfull[:n] = 2.0 * (preds[k] - ex.target) / steps
        d["w_fc"] += np.outer(dfull, cache["h"])
        d["b_fc"] += dfull
        dh = m.w_fc.T @ dfull + dh_next
        tc = np.tanh(cache["c"])
        do = dh * tc
        dc = dc_next + dh * cache["o"] * (1.0 - tc * tc)
        di = dc * cache["g"]
        dg = dc * cache["i"]
        df = dc * cache["c_prev"]
        dc_next = dc * cache["f"]
        dpre = np.concatenate([
            di * cache["i"] * (1.0 - cache["i"]),
            df * cache["f"] * (1.0 - cache["f"]),
            dg * (1.0 - cache["g"] ** 2),
            do * cache["o"] * (1.0 - cache["o"]),
        ])
        d["w_x"] += np.outer(dpre, cache["x"])
        d["w_h"] += np.outer(dpre, cache["h_prev"])
        d["bias"] += dpre
        dh_next = m.w_h.T @ dpre
    return loss, np.concatenate([d[f].ravel() for f in _WEIGHT_FIELDS])


def train_meta(m: MetaLearner, tasks: list[MetaTask], cfg: TrainConfig,
               examples: list[TraceExample] | None = None
               ) -> tuple[MetaLearner, np.ndarray]:
    """Meta-training; returns the trained model and the per-epoch mean loss
    curve (length = epochs).

    The default objective backpropagates the cumulative unrolled energy of
    each task. The supervised mode instead regresses each recorded trace's
    converged parameters from its prefix; pass the ``examples`` built from
    RunRecords (one or more per task) in that case.
    """
    if cfg.objective == SUPERVISED:
        if not examples:
            raise ValidationError("supervised training needs trace examples")
        units = examples
        loss_and_grad = lambda model, ex: _supervised_loss_and_grad(model, ex, cfg.unroll_steps)
    else:
        if not tasks:
            raise ValidationError("training needs at least one task")
        for t in tasks:
            if t.n_params > m.d_max:
                raise CapacityError(f"task {t.descriptor!r} exceeds d_max = {m.d_max}")
        units = tasks
        loss_and_grad = lambda model, t: _task_loss_and_grad(model, t, cfg.unroll_steps)
    from .optimize import AdamState, OptimizerConfig, adam_step

    threads = resolve_threads(cfg.threads)
    opt_cfg = OptimizerConfig(kind="adam", learning_rate=max(cfg.meta_learning_rate, 1e-300),
                              max_iterations=1, tolerance=1e-300)
    lr_zero = cfg.meta_learning_rate == 0.0
    weights = _pack(m)
    state = AdamState.fresh(weights.size)
    rng = np.random.default_rng(cfg.seed)
    batch = cfg.batch_size if cfg.batch_size > 0 else len(units)
    losses = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(units))
        epoch_loss = 0.0
        for start in range(0, len(units), batch):
            chunk = [units[i] for i in order[start : start + batch]]
            model = _unpack(m, weights)
            results = parallel_map(
                lambda u: loss_and_grad(model, u), chunk, threads
            )
            gsum = np.zeros_like(weights)
            for loss, gvec in results:
                epoch_loss += loss
                gsum += gvec
            if not lr_zero:
                state, weights = adam_step(state, weights, gsum / len(chunk), opt_cfg)
        mean_loss = epoch_loss / len(units)
        if not np.isfinite(mean_loss):
            raise TrainingFailure(f"non-finite loss at epoch {epoch}", epoch)
        losses.append(mean_loss)
    return _unpack(m, weights), np.array(losses)


def save_meta(m: MetaLearner, path) -> None:
    """Versioned little-endian binary: magic, version, dims, scale, then the
    weight blocks (w_x, w_h, bias, w_fc, b_fc) as float64 in row-major order."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<III", _VERSION, m.hidden_dim, m.d_max))
        fh.write(struct.pack("<d", m.energy_scale))
        for f in _WEIGHT_FIELDS:
            fh.write(np.ascontiguousarray(getattr(m, f), dtype="<f8").tobytes())


def load_meta(path) -> MetaLearner:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(_MAGIC) + 12 + 8 or blob[: len(_MAGIC)] != _MAGIC:
        raise ModelFormatError("not a meta-learner model file")
    pos = len(_MAGIC)
    version, hidden, d_max = struct.unpack_from("<III", blob, pos)
    pos += 12
    if version != _VERSION:
        raise ModelFormatError(f"unsupported model version {version} (expected {_VERSION})")
    (scale,) = struct.unpack_from("<d", blob, pos)
    pos += 8
    shapes = {
        "w_x": (4 * hidden, 1 + d_max),
        "w_h": (4 * hidden, hidden),
        "bias": (4 * hidden,),
        "w_fc": (d_max, hidden),
        "b_fc": (d_max,),
    }
    arrays = {}
    for name, shape in shapes.items():
        count = int(np.prod(shape))
        nbytes = 8 * count
        if pos + nbytes > len(blob):
            raise ModelFormatError(f"model file truncated in block {name!r}")
        arrays[name] = np.frombuffer(blob, dtype="<f8", count=count, offset=pos).reshape(shape).copy()
        pos += nbytes
    if pos != len(blob):
        raise ModelFormatError(f"{len(blob) - pos} trailing bytes after weight blocks")
    return MetaLearner(hidden, d_max, arrays["w_x"], arrays["w_h"], arrays["bias"],
                       arrays["w_fc"], arrays["b_fc"], scale)
