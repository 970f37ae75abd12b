"""Experiment runner CLI.

Subcommands mirror the study patterns the library supports: single VQE runs,
learning-rate scans, deflated excited-state runs, meta-learner training and
evaluation (including diffusion-depth sweeps), chemistry runs from integral
or Pauli-sum files, and a thread-scaling/backend benchmark.

Settings come from flags and/or a flat JSON config file (flags win; unknown
keys are errors). Every JSON summary embeds the fully resolved
configuration, and seeds are always explicit, so reruns reproduce numeric
output byte for byte (timing columns aside). Exit codes: 0 success,
1 usage/config error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import kernels
from .ansatz import build_hea, build_uccsd, parameter_shift_gradient, run_ansatz
from .errors import (
    ModelFormatError,
    NumericalFailure,
    ParseError,
    TrainingFailure,
    ValidationError,
    VqemetaError,
)
from .exactdiag import ground_energy
from .hamiltonians import ShoSpec, build_sho, jordan_wigner, load_fcidump, load_pauli_sum
from .meta import (
    EvalCounter,
    MetaTask,
    TraceExample,
    TrainConfig,
    init_meta_learner,
    load_meta,
    predict_init,
    save_meta,
    train_meta,
)
from .optimize import OptimizerConfig, RunRecord, VqdConfig, random_theta, run_vqd, run_vqe
from .parallel import THREADS_ENV, parallel_map, resolve_threads
from .statevector import expectation

DEFAULT_INIT_SCALE = 0.04
DEFAULT_LR_GRID = "1e-3,3e-4,1e-4,3e-5,1e-5,3e-6,1e-6"
EXACT_CAP = 12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_seeds(text: str) -> list[int]:
    """'5' means seeds 0..4; '3,7,9' is an explicit list."""
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise UsageError(f"empty seed list {text!r}")
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise UsageError(f"seeds must be integers, got {text!r}")
    if len(values) == 1 and "," not in text:
        n = values[0]
        if n <= 0:
            raise UsageError("seed count must be positive")
        return list(range(n))
    return values


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}")


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}")


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_json(path: str, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_trace(rec: RunRecord, path: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    rec.to_csv(tmp)
    os.replace(tmp, path)


def _resolve(args: argparse.Namespace, argv: list[str]) -> dict:
    """Merge defaults <- config file <- explicit flags into one dict."""
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    path = getattr(args, "config", None)
    if path:
        try:
            with open(path) as fh:
                file_cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"config file {path}: {exc}")
        if not isinstance(file_cfg, dict):
            raise UsageError(f"config file {path} must hold a JSON object")
        unknown = sorted(set(file_cfg) - set(cfg))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        # flags given on the command line win over file values
        given = _given_dests(argv)
        for key, val in file_cfg.items():
            if key not in given:
                cfg[key] = val
    return _normalize(cfg)


def _given_dests(argv: list[str]) -> set[str]:
    out = set()
    for tok in argv:
        if tok.startswith("--"):
            out.add(tok[2:].split("=", 1)[0].replace("-", "_"))
    return out


def _normalize(cfg: dict) -> dict:
    """Coerce config-file scalars/strings into the parsed flag types."""
    if isinstance(cfg.get("seeds"), int):
        cfg["seeds"] = _parse_seeds(str(cfg["seeds"]))
    elif isinstance(cfg.get("seeds"), str):
        cfg["seeds"] = _parse_seeds(cfg["seeds"])
    for key, fn in (("lrs", _parse_floats), ("train_omegas", _parse_floats),
                    ("k_sweep", _parse_ints), ("thread_counts", _parse_ints)):
        if isinstance(cfg.get(key), str):
            cfg[key] = fn(cfg[key])
    if isinstance(cfg.get("backends"), str):
        cfg["backends"] = [b.strip() for b in cfg["backends"].split(",") if b.strip()]
    return cfg


def _out_dir(cfg: dict) -> str:
    out = cfg.get("out") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _build_system(cfg: dict):
    """Returns (hamiltonian, label, n_electrons_hint)."""
    system = cfg["system"]
    if system == "sho":
        spec = ShoSpec(cfg["omega"], cfg["qubits"])
        return build_sho(spec), f"sho(omega={spec.omega}, n={spec.n_qubits})", None
    if system == "pauli-file":
        if not cfg.get("hamiltonian_file"):
            raise UsageError("--hamiltonian-file is required for system=pauli-file")
        h = load_pauli_sum(cfg["hamiltonian_file"])
        return h, f"pauli-file({cfg['hamiltonian_file']})", cfg.get("electrons")
    if system == "fcidump":
        if not cfg.get("hamiltonian_file"):
            raise UsageError("--hamiltonian-file is required for system=fcidump")
        ints = load_fcidump(cfg["hamiltonian_file"], cfg.get("two_body_ordering", "chemist"))
        h = jordan_wigner(ints)
        return h, f"fcidump({cfg['hamiltonian_file']})", ints.n_electrons
    raise UsageError(f"unknown system {system!r}")


def _build_ansatz(cfg: dict, h, n_electrons_hint):
    kind = cfg["ansatz"]
    if kind == "hea":
        return build_hea(h.n_qubits, cfg["layers"])
    if kind == "uccsd":
        nelec = cfg.get("electrons")
        if nelec is None:
            nelec = n_electrons_hint
        if nelec is None:
            raise UsageError("uccsd needs --electrons (or an FCIDUMP with NELEC)")
        program, _ = build_uccsd(h.n_qubits, int(nelec))
        return program
    raise UsageError(f"unknown ansatz {kind!r}")


def _optimizer_config(cfg: dict) -> OptimizerConfig:
    return OptimizerConfig(
        kind=cfg["opt"],
        learning_rate=cfg["lr"],
        adam_beta1=cfg["beta1"],
        adam_beta2=cfg["beta2"],
        adam_epsilon=cfg["epsilon"],
        max_iterations=cfg["max_iter"],
        tolerance=cfg["tol"],
    )


def _initial_theta(cfg: dict, program, h, seed: int) -> np.ndarray:
    init = cfg["init"]
    if init == "zero":
        return np.zeros(program.n_params)
    if init == "random":
        return random_theta(program.n_params, seed, cfg["init_scale"])
    if init == "meta":
        if not cfg.get("model"):
            raise UsageError("--model is required for init=meta")
        m = load_meta(cfg["model"])
        task = MetaTask(h, program, descriptor="cli")
        return predict_init(m, task, cfg["diffusion_steps"])
    raise UsageError(f"unknown init kind {init!r}")


def _reference_energy(cfg: dict, h) -> float | None:
    ref = cfg.get("reference", "auto")
    if ref == "none":
        return None
    if ref in ("exact", "auto"):
        if h.n_qubits <= EXACT_CAP:
            return ground_energy(h)
        if ref == "exact":
            raise UsageError(f"exact reference needs <= {EXACT_CAP} qubits, got {h.n_qubits}")
        return None
    raise UsageError(f"unknown reference {ref!r}")


def _echo(cfg: dict, **extra) -> dict:
    out = dict(cfg)
    out.update(extra)
    return out


def cmd_vqe(cfg: dict) -> int:
    out = _out_dir(cfg)
    h, label, nelec = _build_system(cfg)
    program = _build_ansatz(cfg, h, nelec)
    opt = _optimizer_config(cfg)
    e_ref = _reference_energy(cfg, h)
    seeds = cfg["seeds"]
    threads = resolve_threads(cfg.get("threads"))

    def one(seed: int) -> RunRecord:
        theta0 = _initial_theta(cfg, program, h, seed)
        return run_vqe(h, program, theta0, opt, threads=threads,
                       init_kind=cfg["init"], seed=seed, trace_stride=cfg["trace_stride"])

    records = parallel_map(one, seeds, cfg["jobs"])
    rows = []
    for seed, rec in zip(seeds, records):
        _write_trace(rec, os.path.join(out, f"trace_{seed}.csv"))
        err = abs(rec.final_energy - e_ref) if e_ref is not None else None
        rows.append({"seed": seed, **rec.summary()})
        if err is not None:
            rows[-1]["abs_error"] = err
        print(f"seed {seed}: E = {rec.final_energy:.10f}"
              + (f"  abs_err = {err:.3e}" if err is not None else "")
              + f"  iters = {rec.iterations}  converged = {rec.converged}")
    summary = {
        "system": label,
        "config": _echo(cfg, resolved_threads=threads),
        "exact_ground_energy": e_ref,
        "runs": rows,
        "median_iterations": float(np.median([r["iterations"] for r in rows])),
        "median_final_energy": float(np.median([r["final_energy"] for r in rows])),
    }
    if e_ref is not None:
        summary["median_abs_error"] = float(np.median([r["abs_error"] for r in rows]))
        print(f"median abs error: {summary['median_abs_error']:.3e}")
    _write_json(os.path.join(out, "summary.json"), summary)
    return 0


def cmd_lr_scan(cfg: dict) -> int:
    out = _out_dir(cfg)
    h, label, nelec = _build_system(cfg)
    program = _build_ansatz(cfg, h, nelec)
    e_ref = _reference_energy(cfg, h)
    seeds = cfg["seeds"]
    threads = resolve_threads(cfg.get("threads"))
    grid = cfg["lrs"]

    def one(job):
        lr, seed = job
        opt = _optimizer_config({**cfg, "lr": lr})
        theta0 = _initial_theta(cfg, program, h, seed)
        rec = run_vqe(h, program, theta0, opt, threads=threads,
                      init_kind=cfg["init"], seed=seed)
        return rec

    jobs = [(lr, seed) for lr in grid for seed in seeds]
    recs = parallel_map(one, jobs, cfg["jobs"])
    lines = [f"# grid: {','.join(f'{lr:g}' for lr in grid)}",
             "lr,median_final_energy,median_abs_error,median_iterations,median_time_s"]
    table = []
    for i, lr in enumerate(grid):
        chunk = recs[i * len(seeds):(i + 1) * len(seeds)]
        med_e = float(np.median([r.final_energy for r in chunk]))
        med_it = float(np.median([r.iterations for r in chunk]))
        med_t = float(np.median([r.wall_time for r in chunk]))
        med_err = float(np.median([abs(r.final_energy - e_ref) for r in chunk])) if e_ref is not None else float("nan")
        table.append({"lr": lr, "median_final_energy": med_e, "median_abs_error": med_err,
                      "median_iterations": med_it, "median_time_s": med_t})
        lines.append(f"{lr:g},{med_e:.17g},{med_err:.17g},{med_it:g},{med_t:.6g}")
        print(f"lr {lr:<8g} median_err {med_err:.3e} median_iters {med_it:5.0f}")
    best = min(table, key=lambda r: r["median_abs_error"]) if e_ref is not None else None
    if best is not None:
        print(f"best lr by median abs error: {best['lr']:g} ({best['median_abs_error']:.3e})")
    _atomic_write(os.path.join(out, "scan.csv"), "\n".join(lines) + "\n")
    _write_json(os.path.join(out, "summary.json"), {
        "system": label,
        "config": _echo(cfg, resolved_threads=threads),
        "exact_ground_energy": e_ref,
        "scan": table,
        "best_lr": None if best is None else best["lr"],
    })
    return 0


def cmd_vqd(cfg: dict) -> int:
    out = _out_dir(cfg)
    h, label, nelec = _build_system(cfg)
    program = _build_ansatz(cfg, h, nelec)
    threads = resolve_threads(cfg.get("threads"))
    beta = cfg.get("beta")
    if beta is None:
        if cfg["system"] != "sho":
            raise UsageError("--beta is required for non-oscillator systems")
        beta = 10.0 * cfg["omega"]
    if beta == 0.0:
        print("warning: beta = 0 disables deflation; this reproduces the ground state")
    e_ref = _reference_energy(cfg, h)
    opt_ground = _optimizer_config(cfg)
    opt_excited = OptimizerConfig(
        kind=cfg["opt"], learning_rate=cfg["excited_lr"], adam_beta1=cfg["beta1"],
        adam_beta2=cfg["beta2"], adam_epsilon=cfg["epsilon"],
        max_iterations=cfg["excited_max_iter"], tolerance=cfg["excited_tol"],
    )
    rows = []
    for seed in cfg["seeds"]:
        theta0 = random_theta(program.n_params, seed, cfg["init_scale"])
        ground = run_vqe(h, program, theta0, opt_ground, threads=threads,
                         init_kind="random", seed=seed)
        if not ground.converged:
            raise NumericalFailure(
                f"seed {seed}: ground-state run did not converge; refusing to deflate",
                ground,
            )
        psi0 = run_ansatz(program, ground.final_theta)
        theta_e = _initial_theta(cfg, program, h, seed + 1000)
        rec = run_vqd(h, program, theta_e, opt_excited,
                      VqdConfig(beta=beta, reference_states=[psi0]),
                      threads=threads, init_kind=cfg["init"], seed=seed)
        _write_trace(ground, os.path.join(out, f"trace_ground_{seed}.csv"))
        _write_trace(rec, os.path.join(out, f"trace_excited_{seed}.csv"))
        rows.append({
            "seed": seed,
            "ground_energy": ground.final_energy,
            "excited_energy": rec.final_energy,
            "final_overlap_sq": float(rec.overlaps[-1]),
            "ground_iterations": ground.iterations,
            "excited_iterations": rec.iterations,
            "excited_converged": rec.converged,
        })
        print(f"seed {seed}: E0 = {ground.final_energy:.8f}  E1 = {rec.final_energy:.8f}"
              f"  overlap^2 = {rec.overlaps[-1]:.3e}  iters = {rec.iterations}")
    _write_json(os.path.join(out, "summary.json"), {
        "system": label,
        "config": _echo(cfg, resolved_threads=threads, beta=beta),
        "exact_ground_energy": e_ref,
        "runs": rows,
    })
    return 0


def _sho_meta_tasks(omegas, qubits, layers):
    program = build_hea(qubits, layers)
    return [
        MetaTask(build_sho(ShoSpec(w, qubits)), program, descriptor=f"sho omega={w}")
        for w in omegas
    ]


def cmd_meta_train(cfg: dict) -> int:
    out = _out_dir(cfg)
    tasks = _sho_meta_tasks(cfg["train_omegas"], cfg["qubits"], cfg["layers"])
    d_max = cfg["dmax"] or max(t.n_params for t in tasks)
    model = init_meta_learner(d_max, cfg["hidden"], seed=cfg["model_seed"])
    tc = TrainConfig(unroll_steps=cfg["diffusion_steps"], epochs=cfg["epochs"],
                     meta_learning_rate=cfg["meta_lr"], batch_size=cfg["batch"],
                     seed=cfg["model_seed"], threads=cfg.get("threads"),
                     objective=cfg["objective"])
    examples = None
    if cfg["objective"] == "supervised":
        # supervised mode learns from real optimization traces: collect one
        # converged run per (task, seed) first
        collect_cfg = OptimizerConfig(kind="adam", learning_rate=3e-4,
                                      tolerance=1e-7, max_iterations=1000)
        examples = []
        for task in tasks:
            for seed in range(cfg["examples_per_task"]):
                rec = run_vqe(task.hamiltonian, task.ansatz,
                              random_theta(task.n_params, seed, cfg["init_scale"]),
                              collect_cfg, threads=resolve_threads(cfg.get("threads")),
                              init_kind="random", seed=seed)
                examples.append(TraceExample.from_record(rec))
    t0 = time.perf_counter()
    model, losses = train_meta(model, tasks, tc, examples)
    dt = time.perf_counter() - t0
    model_path = os.path.join(out, "model.bin")
    save_meta(model, model_path)
    _atomic_write(os.path.join(out, "loss.csv"),
                  "epoch,loss\n" + "".join(f"{i},{l:.17g}\n" for i, l in enumerate(losses)))
    _write_json(os.path.join(out, "summary.json"), {
        "config": _echo(cfg, d_max=d_max),
        "epochs": len(losses),
        "final_loss": float(losses[-1]) if len(losses) else None,
        "train_time_s": dt,
        "model": model_path,
    })
    print(f"trained {len(losses)} epochs in {dt:.1f}s"
          + (f"; loss {losses[0]:.6f} -> {losses[-1]:.6f}" if len(losses) else ""))
    print(f"model written to {model_path}")
    return 0


def cmd_meta_eval(cfg: dict) -> int:
    out = _out_dir(cfg)
    if not cfg.get("model"):
        raise UsageError("--model is required")
    model = load_meta(cfg["model"])
    h = build_sho(ShoSpec(cfg["omega"], cfg["qubits"]))
    program = build_hea(cfg["qubits"], cfg["layers"])
    task = MetaTask(h, program, descriptor=f"sho omega={cfg['omega']}")
    opt = _optimizer_config(cfg)
    threads = resolve_threads(cfg.get("threads"))
    e_ref = _reference_energy(cfg, h)

    if cfg.get("k_sweep"):
        lines = ["k,energy_evals,init_energy,final_abs_error,iterations"]
        rows = []
        for k in cfg["k_sweep"]:
            counter = EvalCounter()
            theta0 = predict_init(model, task, k, counter)
            e_init = expectation(h, run_ansatz(program, theta0))
            rec = run_vqe(h, program, theta0, opt, threads=threads, init_kind="meta")
            err = abs(rec.final_energy - e_ref) if e_ref is not None else float("nan")
            rows.append({"k": k, "energy_evals": counter.count, "init_energy": e_init,
                         "final_abs_error": err, "iterations": rec.iterations})
            lines.append(f"{k},{counter.count},{e_init:.17g},{err:.17g},{rec.iterations}")
            print(f"K={k}: overhead evals = {counter.count}  init E = {e_init:.8f}"
                  f"  final err = {err:.3e}  iters = {rec.iterations}")
        _atomic_write(os.path.join(out, "sweep.csv"), "\n".join(lines) + "\n")
        _write_json(os.path.join(out, "summary.json"),
                    {"config": _echo(cfg), "sweep": rows, "exact_ground_energy": e_ref})
        return 0

    theta_meta = predict_init(model, task, cfg["diffusion_steps"])
    lines = ["init,seed,iterations,final_energy,abs_error,wall_s"]
    stats: dict[str, dict[str, list]] = {"meta": {"it": [], "err": []},
                                         "random": {"it": [], "err": []}}
    for seed in cfg["seeds"]:
        for kind, theta0 in (("meta", theta_meta),
                             ("random", random_theta(program.n_params, seed, cfg["init_scale"]))):
            rec = run_vqe(h, program, theta0, opt, threads=threads, init_kind=kind, seed=seed)
            err = abs(rec.final_energy - e_ref) if e_ref is not None else float("nan")
            stats[kind]["it"].append(rec.iterations)
            stats[kind]["err"].append(err)
            lines.append(f"{kind},{seed},{rec.iterations},{rec.final_energy:.17g},"
                         f"{err:.17g},{rec.wall_time:.6g}")
    med = {k: {"iterations": float(np.median(v["it"])), "abs_error": float(np.median(v["err"]))}
           for k, v in stats.items()}
    ratio = med["meta"]["iterations"] / med["random"]["iterations"]
    print(f"meta:   median iters {med['meta']['iterations']:.0f}  median err {med['meta']['abs_error']:.3e}")
    print(f"random: median iters {med['random']['iterations']:.0f}  median err {med['random']['abs_error']:.3e}")
    print(f"iteration ratio (meta/random): {ratio:.3f}")
    _atomic_write(os.path.join(out, "eval.csv"), "\n".join(lines) + "\n")
    _write_json(os.path.join(out, "summary.json"), {
        "config": _echo(cfg),
        "exact_ground_energy": e_ref,
        "medians": med,
        "iteration_ratio": ratio,
    })
    return 0


def cmd_chem(cfg: dict) -> int:
    out = _out_dir(cfg)
    h, label, nelec = _build_system(cfg)
    program = _build_ansatz(cfg, h, nelec)
    opt = _optimizer_config(cfg)
    threads = resolve_threads(cfg.get("threads"))
    e_ref = _reference_energy(cfg, h)
    rows = []
    for seed in cfg["seeds"]:
        theta0 = _initial_theta(cfg, program, h, seed)
        rec = run_vqe(h, program, theta0, opt, threads=threads,
                      init_kind=cfg["init"], seed=seed)
        _write_trace(rec, os.path.join(out, f"trace_{seed}.csv"))
        row = {"seed": seed, **rec.summary()}
        if e_ref is not None:
            row["abs_error"] = abs(rec.final_energy - e_ref)
        rows.append(row)
        print(f"seed {seed}: E = {rec.final_energy:.10f}"
              + (f"  abs_err vs exact = {row['abs_error']:.3e}" if e_ref is not None else "")
              + f"  iters = {rec.iterations}")
    _write_json(os.path.join(out, "summary.json"), {
        "system": label,
        "config": _echo(cfg, resolved_threads=threads),
        "exact_ground_energy": e_ref,
        "runs": rows,
    })
    return 0


def _bench_workload(cfg: dict):
    h = build_sho(ShoSpec(cfg["omega"], cfg["qubits"])) if not cfg.get("hamiltonian_file") \
        else load_pauli_sum(cfg["hamiltonian_file"])
    program = build_hea(h.n_qubits, cfg["layers"])
    theta = random_theta(program.n_params, 0, 0.5)
    return h, program, theta


def cmd_bench_threads(cfg: dict) -> int:
    out = _out_dir(cfg)
    h, program, theta = _bench_workload(cfg)
    state = run_ansatz(program, theta)
    results = []
    lines = ["backend,threads,seconds,energy,speedup_vs_1thread"]
    for backend in cfg["backends"]:
        kernels.use_backend(backend)
        try:
            run_ansatz(program, theta)  # warm-up (jit compile)
            base = None
            for threads in cfg["thread_counts"]:
                t0 = time.perf_counter()
                for _ in range(cfg["repeats"]):
                    e = expectation(h, state, threads=threads)
                    g = parameter_shift_gradient(program, h, theta, threads=threads)
                dt = (time.perf_counter() - t0) / cfg["repeats"]
                if base is None:
                    base = dt
                    e1, g1 = e, g
                else:
                    if abs(e - e1) > 1e-12 or np.max(np.abs(g - g1)) > 1e-12:
                        raise NumericalFailure(
                            f"{backend}: results drift across thread counts "
                            f"(dE={abs(e - e1):.3e})"
                        )
                speedup = base / dt
                results.append({"backend": backend, "threads": threads,
                                "seconds": dt, "energy": e, "speedup": speedup})
                lines.append(f"{backend},{threads},{dt:.6f},{e:.17g},{speedup:.3f}")
                print(f"{backend:6s} threads={threads:<2d} {dt:8.4f}s  speedup {speedup:5.2f}x")
        finally:
            kernels.use_backend("auto")
    _atomic_write(os.path.join(out, "bench.csv"), "\n".join(lines) + "\n")
    _write_json(os.path.join(out, "summary.json"),
                {"config": _echo(cfg, cpu_count=os.cpu_count()), "results": results})
    return 0


def _add_common(p: argparse.ArgumentParser, system: bool = True):
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--out", help="output directory (default: current)")
    p.add_argument("--threads", type=int, default=None,
                   help=f"simulator threads (default: ${THREADS_ENV} or 1)")
    p.add_argument("--jobs", type=int, default=1, help="concurrent independent runs")
    if system:
        p.add_argument("--system", choices=["sho", "pauli-file", "fcidump"], default="sho")
        p.add_argument("--omega", type=float, default=0.5)
        p.add_argument("--qubits", type=int, default=4)
        p.add_argument("--hamiltonian-file", dest="hamiltonian_file")
        p.add_argument("--two-body-ordering", dest="two_body_ordering",
                       choices=["chemist", "physicist"], default="chemist")
        p.add_argument("--ansatz", choices=["hea", "uccsd"], default="hea")
        p.add_argument("--layers", type=int, default=5)
        p.add_argument("--electrons", type=int, default=None)
        p.add_argument("--reference", choices=["auto", "exact", "none"], default="auto")


def _add_optimizer(p: argparse.ArgumentParser):
    p.add_argument("--opt", choices=["adam", "sgd"], default="adam")
    p.add_argument("--lr", type=float, default=3e-4)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=1000)
    p.add_argument("--beta1", type=float, default=0.9)
    p.add_argument("--beta2", type=float, default=0.999)
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.add_argument("--trace-stride", dest="trace_stride", type=int, default=1)


def _add_init(p: argparse.ArgumentParser):
    p.add_argument("--init", choices=["zero", "random", "meta"], default="random")
    p.add_argument("--init-scale", dest="init_scale", type=float, default=DEFAULT_INIT_SCALE,
                   help="half-width of the uniform random init")
    p.add_argument("--model", help="meta-learner model file (init=meta)")
    p.add_argument("--diffusion-steps", dest="diffusion_steps", type=int, default=3,
                   help="recurrent unroll steps for meta prediction")


def _add_seeds(p: argparse.ArgumentParser, default: str):
    p.add_argument("--seeds", type=_parse_seeds, default=_parse_seeds(default),
                   help="count ('5' = seeds 0..4) or explicit list '3,7,9'")


def build_parser() -> _Parser:
    parser = _Parser(prog="vqemeta", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vqe", help="ground-state optimization runs")
    _add_common(p)
    _add_optimizer(p)
    _add_init(p)
    _add_seeds(p, "5")
    p.set_defaults(func=cmd_vqe)

    p = sub.add_parser("lr-scan", help="learning-rate grid study")
    _add_common(p)
    _add_optimizer(p)
    _add_init(p)
    _add_seeds(p, "5")
    p.add_argument("--lrs", type=_parse_floats, default=_parse_floats(DEFAULT_LR_GRID))
    p.set_defaults(func=cmd_lr_scan)

    p = sub.add_parser("vqd", help="first-excited-state runs via deflation")
    _add_common(p)
    _add_optimizer(p)
    _add_init(p)
    _add_seeds(p, "3")
    p.add_argument("--beta", type=float, default=None,
                   help="overlap penalty weight (default 10*omega for sho)")
    p.add_argument("--excited-lr", dest="excited_lr", type=float, default=1e-2)
    p.add_argument("--excited-tol", dest="excited_tol", type=float, default=1e-10)
    p.add_argument("--excited-max-iter", dest="excited_max_iter", type=int, default=12000)
    p.set_defaults(func=cmd_vqd)

    p = sub.add_parser("meta-train", help="train the warm-start meta-learner")
    _add_common(p, system=False)
    p.add_argument("--train-omegas", dest="train_omegas", type=_parse_floats,
                   default=_parse_floats("0.40,0.45,0.55,0.60"))
    p.add_argument("--qubits", type=int, default=4)
    p.add_argument("--layers", type=int, default=5)
    p.add_argument("--dmax", type=int, default=0, help="0 = largest task size")
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--diffusion-steps", dest="diffusion_steps", type=int, default=3)
    p.add_argument("--epochs", type=int, default=150)
    p.add_argument("--meta-lr", dest="meta_lr", type=float, default=1e-2)
    p.add_argument("--batch", type=int, default=0, help="tasks per update (0 = all)")
    p.add_argument("--model-seed", dest="model_seed", type=int, default=0)
    p.add_argument("--objective", choices=["unrolled", "supervised"], default="unrolled")
    p.add_argument("--examples-per-task", dest="examples_per_task", type=int, default=2)
    p.add_argument("--init-scale", dest="init_scale", type=float, default=DEFAULT_INIT_SCALE)
    p.set_defaults(func=cmd_meta_train)

    p = sub.add_parser("meta-eval", help="meta vs random comparison / K sweep")
    _add_common(p, system=False)
    p.add_argument("--model", required=False)
    p.add_argument("--omega", type=float, default=0.5)
    p.add_argument("--qubits", type=int, default=4)
    p.add_argument("--layers", type=int, default=5)
    _add_optimizer(p)
    p.add_argument("--init-scale", dest="init_scale", type=float, default=DEFAULT_INIT_SCALE)
    p.add_argument("--diffusion-steps", dest="diffusion_steps", type=int, default=3)
    p.add_argument("--k-sweep", dest="k_sweep", type=_parse_ints, default=None,
                   help="e.g. '1,2,3,5,8': report overhead/accuracy per depth")
    p.add_argument("--reference", choices=["auto", "exact", "none"], default="auto")
    _add_seeds(p, "10")
    p.set_defaults(func=cmd_meta_eval)

    p = sub.add_parser("chem", help="VQE on a loaded chemistry Hamiltonian")
    _add_common(p)
    _add_optimizer(p)
    _add_init(p)
    _add_seeds(p, "1")
    p.set_defaults(func=cmd_chem, system="fcidump", ansatz="uccsd", init="zero", lr=1e-2, tol=1e-10)

    p = sub.add_parser("bench-threads", help="thread-scaling and backend benchmark")
    _add_common(p, system=False)
    p.add_argument("--qubits", type=int, default=14)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--omega", type=float, default=0.5)
    p.add_argument("--hamiltonian-file", dest="hamiltonian_file")
    p.add_argument("--thread-counts", dest="thread_counts", type=_parse_ints, default=[1, 2, 4, 8])
    p.add_argument("--backends", type=lambda s: [b.strip() for b in s.split(",") if b.strip()],
                   default=["numba"])
    p.add_argument("--repeats", type=int, default=1)
    p.set_defaults(func=cmd_bench_threads)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(argv)
        cfg = _resolve(args, argv)
        return args.func(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("run with --help for usage", file=sys.stderr)
        return 1
    except (ParseError, ModelFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (NumericalFailure, TrainingFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, VqemetaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
