"""Experiment orchestration and the `flowgen-vqe` command-line interface.

Modes:
  gen-tfim    write a transverse-field Ising family as Hamiltonian JSON files
  exact       print/record the exact ground energy of a Hamiltonian file
  vqe         one baseline-optimizer run (GD/Adam/QNSPSA) on one instance
  flow-s      preference-trained flow on a single instance
  flow-m      preference-trained flow shared across a family of instances
  generate    sample parameters from a checkpoint across instances (PES scan)
  warm-start  post-train from a flow/zero/transferred initialization
  cost-report break-even analysis of warm-start versus from-scratch costs
  geometry    emit parameterized molecular coordinates as XYZ text

Every run writes a JSON summary (and, where applicable, a JSONL metrics
stream, CSV export, and a model checkpoint) under the output directory. Runs
are deterministic given their config, including the seed; wall-clock fields
are the only nondeterministic output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import flow as flow_mod
from .ansatz import AnsatzSpec, param_count, prepare_state, spec_from_dict, spec_to_dict
from .baselines import run_optimizer
from .flow import FlowConfig, FlowModel, load_checkpoint, save_checkpoint
from .geometry import geometry, to_xyz
from .hamiltonian import (
    DEFAULT_DENSE_CAP,
    ContextVector,
    Hamiltonian,
    context_of,
    exact_ground_energy,
    family_term_order,
    parse_hamiltonian,
    serialize_hamiltonian,
    tfim,
)
from .metrics import MetricsRecord, read_jsonl, write_csv, write_jsonl
from .simulator import EvalCounter, expectation, prepare_basis
from .training import TrainConfig, rng_for, train_flow_vqe

#: Energy-error threshold defining "computational accuracy".
DEFAULT_ACCURACY = 1.6e-3

MODES = (
    "vqe", "flow-s", "flow-m", "generate", "warm-start",
    "cost-report", "geometry", "gen-tfim", "exact",
)

# Flow-layer defaults: single-instance runs use the shallower setting, shared
# multi-instance models the deeper one.
FLOW_S_LAYERS = 7
FLOW_M_LAYERS = 20


class ConfigError(ValueError):
    """Run-config validation failure; message names the offending field."""


@dataclass
class RunConfig:
    mode: str
    seed: int = 0
    out_dir: str = "runs"
    csv: bool = False
    accuracy_threshold: float = DEFAULT_ACCURACY
    hamiltonian: str | None = None
    hamiltonians: list[str] = field(default_factory=list)
    tfim: dict | None = None
    ansatz: dict | None = None
    flow: dict = field(default_factory=dict)
    train: dict = field(default_factory=dict)
    optimizer: dict = field(default_factory=dict)
    checkpoint: str | None = None
    samples_per_point: int = 16
    init: str = "zero"
    transfer_source: str | None = None
    molecule: str | None = None
    distance: float | None = None
    cost: dict | None = None
    theta0: list[float] | None = None

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        if not isinstance(obj, dict):
            raise ConfigError("run config must be a JSON object")
        if "mode" not in obj:
            raise ConfigError("missing required field 'mode'")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
        return cls(**obj)

    def instance_paths(self) -> list[str]:
        paths = list(self.hamiltonians)
        if self.hamiltonian:
            paths.insert(0, self.hamiltonian)
        return paths

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; choose one of {MODES}")
        need = {
            "vqe": ["ansatz"],
            "flow-s": ["ansatz", "train"],
            "flow-m": ["ansatz", "train"],
            "generate": ["checkpoint"],
            "warm-start": ["ansatz", "optimizer"],
            "cost-report": ["cost"],
            "geometry": ["molecule", "distance"],
            "gen-tfim": ["tfim"],
            "exact": [],
        }[self.mode]
        for name in need:
            value = getattr(self, name)
            if value is None or value == {} or value == []:
                raise ConfigError(f"mode {self.mode!r} requires field {name!r}")
        if self.mode in ("vqe", "flow-s", "warm-start", "exact") and not self.instance_paths():
            raise ConfigError(f"mode {self.mode!r} requires field 'hamiltonian'")
        if self.mode in ("flow-m", "generate") and not self.instance_paths():
            raise ConfigError(f"mode {self.mode!r} requires field 'hamiltonians'")
        for path in self.instance_paths():
            if not os.path.exists(path):
                raise ConfigError(f"hamiltonian file not found: {path}")
        if self.mode == "generate" or (self.mode == "warm-start" and self.init == "flow"):
            if not self.checkpoint or not os.path.exists(self.checkpoint):
                raise ConfigError(f"checkpoint file not found: {self.checkpoint!r}")
        if self.mode == "warm-start" and self.init not in ("flow", "zero", "transfer"):
            raise ConfigError(f"init must be 'flow', 'zero', or 'transfer', got {self.init!r}")
        if self.mode == "warm-start" and self.init == "transfer":
            if not self.transfer_source or not os.path.exists(self.transfer_source):
                raise ConfigError(f"transfer_source file not found: {self.transfer_source!r}")
        if self.mode == "gen-tfim":
            for key in ("n", "g_values"):
                if key not in self.tfim:
                    raise ConfigError(f"tfim config requires field {key!r}")

    def run_id(self) -> str:
        digest = hashlib.sha1(
            json.dumps(asdict(self), sort_keys=True).encode()
        ).hexdigest()[:8]
        return f"{self.mode}-s{self.seed}-{digest}"


# -- cost model ---------------------------------------------------------------


@dataclass(frozen=True)
class CostReport:
    """Break-even analysis of a warm-start strategy against standard VQE."""

    c_pre: float
    c_post_bar: float
    c_vqe_bar: float
    n_test: int
    total_warm: float
    total_vqe: float
    break_even: int | None

    def warm_total_at(self, n: int) -> float:
        return self.c_pre + self.c_post_bar * n

    def vqe_total_at(self, n: int) -> float:
        return self.c_vqe_bar * n


def cost_report(c_pre: float, post_costs, vqe_costs) -> CostReport:
    """Means, totals, and the smallest test-point count at which pre-training
    plus per-point post-training strictly undercuts from-scratch VQE."""
    post_costs = list(post_costs)
    vqe_costs = list(vqe_costs)
    if not post_costs or not vqe_costs:
        raise ValueError("cost lists must be non-empty")
    c_post_bar = float(np.mean(post_costs))
    c_vqe_bar = float(np.mean(vqe_costs))
    n_test = len(post_costs)
    if c_vqe_bar > c_post_bar:
        break_even = int(math.floor(c_pre / (c_vqe_bar - c_post_bar))) + 1
    else:
        break_even = None
    return CostReport(
        c_pre=float(c_pre),
        c_post_bar=c_post_bar,
        c_vqe_bar=c_vqe_bar,
        n_test=n_test,
        total_warm=float(c_pre + c_post_bar * n_test),
        total_vqe=float(c_vqe_bar * n_test),
        break_even=break_even,
    )


# -- shared helpers -----------------------------------------------------------


def _load_instances(paths: list[str]) -> list[Hamiltonian]:
    instances = []
    for path in paths:
        with open(path, "rb") as fh:
            instances.append(parse_hamiltonian(fh.read()))
    return instances


def _exact_for(h: Hamiltonian) -> float | None:
    if h.ref_energies and "exact" in h.ref_energies:
        return h.ref_energies["exact"]
    if h.n_qubits <= DEFAULT_DENSE_CAP:
        return exact_ground_energy(h)
    return None


def _check_family(term_order, family_id: str, h: Hamiltonian) -> None:
    if family_id and h.family_id and family_id != h.family_id:
        raise ValueError(
            f"checkpoint family {family_id!r} does not match instance family {h.family_id!r}"
        )
    missing = [p for p in h.pauli_strings if p not in set(term_order)]
    if missing:
        raise ValueError(
            f"instance {h.instance_label!r} has terms outside the checkpoint's "
            f"term order (first: {missing[0]!r})"
        )


def _flow_config(d: int, context_dim: int, flow_dict: dict, default_layers: int) -> FlowConfig:
    opts = dict(flow_dict)
    opts.setdefault("n_layers", default_layers)
    return FlowConfig(dim=d, context_dim=context_dim, **opts)


def _train_config(train_dict: dict, seed: int) -> TrainConfig:
    opts = dict(train_dict)
    opts.setdefault("seed", seed)
    return TrainConfig(**opts)


def generate_pes(
    model: FlowModel,
    term_order,
    family_id: str,
    instances: list[Hamiltonian],
    spec: AnsatzSpec,
    samples_per_point: int = 16,
    seed: int = 0,
    counter: EvalCounter | None = None,
) -> list[dict]:
    """Sample the generator on each instance; report min/mean energies and,
    where an exact reference exists, the best-sample error."""
    counter = counter if counter is not None else EvalCounter()
    results = []
    for idx, h in enumerate(instances):
        _check_family(term_order, family_id, h)
        gamma = context_of(h, term_order)
        rng = rng_for(seed, 2, idx)
        draws = model.sample(gamma, samples_per_point, rng)
        energies = np.array([
            expectation(prepare_state(spec, theta), h, counter) for theta, _ in draws
        ])
        best = int(np.argmin(energies))
        exact = _exact_for(h)
        results.append({
            "instance_label": h.instance_label,
            "e_min": float(energies[best]),
            "e_mean": float(energies.mean()),
            "error_min": None if exact is None else float(energies[best] - exact),
            "exact": exact,
            "cumulative_evaluations": counter.count,
            "best_theta": [float(v) for v in draws[best][0]],
        })
    return results


@dataclass
class WarmStartResult:
    trajectory: list[MetricsRecord]
    n_ca: int | None
    delta_e_min: float | None
    init_energy: float
    init_sampling_evals: int
    optimizer_evals: int
    initial_evals: int
    theta0: np.ndarray
    theta_final: np.ndarray


def warm_start_post_train(
    init: str,
    spec: AnsatzSpec,
    h: Hamiltonian,
    method: str = "ADAM",
    lr: float = 0.02,
    budget: int = 1000,
    accuracy_threshold: float = DEFAULT_ACCURACY,
    exact_energy: float | None = None,
    model: FlowModel | None = None,
    term_order=None,
    family_id: str = "",
    samples_per_point: int = 16,
    transfer_theta: np.ndarray | None = None,
    seed: int = 0,
    eps: float = 0.01,
    run_id: str = "warm",
    mode: str = "warm-start",
) -> WarmStartResult:
    """Post-train from a chosen initialization and report when (in counted
    circuit evaluations) the run first reaches computational accuracy.

    N_ca convention: if the initialization is already within the threshold,
    N_ca is the single counted initial evaluation; otherwise it is the
    optimizer-loop evaluations (2dN or 6N) at the first crossing, excluding
    that initial probe, matching the reported-as-multiples-of-2d convention.
    Flow-init sampling evaluations are tracked separately.
    """
    d = param_count(spec)
    init_sampling_evals = 0
    if init == "zero":
        theta0 = np.zeros(d)
    elif init == "transfer":
        if transfer_theta is None:
            raise ValueError("transfer initialization needs transfer_theta")
        from .baselines import parameter_transfer

        theta0 = parameter_transfer(np.asarray(transfer_theta, dtype=float), spec)
    elif init == "flow":
        if model is None or term_order is None:
            raise ValueError("flow initialization needs a model and its term order")
        _check_family(term_order, family_id, h)
        gamma = context_of(h, term_order)
        rng = rng_for(seed, 5, 0)
        sample_counter = EvalCounter()
        draws = model.sample(gamma, samples_per_point, rng)
        energies = [
            expectation(prepare_state(spec, theta), h, sample_counter) for theta, _ in draws
        ]
        theta0 = draws[int(np.argmin(energies))][0]
        init_sampling_evals = sample_counter.count
    else:
        raise ValueError(f"unknown init {init!r}")

    if exact_energy is None:
        exact_energy = _exact_for(h)
    trajectory, state = run_optimizer(
        method,
        spec,
        h,
        theta0,
        lr,
        budget,
        stop_accuracy=accuracy_threshold,
        exact_energy=exact_energy,
        eps=eps,
        seed=seed,
        run_id=run_id,
        mode=mode,
    )
    n_ca = compute_n_ca(trajectory, state.initial_evals, accuracy_threshold)
    errors = [r.error_vs_exact for r in trajectory if r.error_vs_exact is not None]
    return WarmStartResult(
        trajectory=trajectory,
        n_ca=n_ca,
        delta_e_min=min(errors) if errors else None,
        init_energy=trajectory[0].energy,
        init_sampling_evals=init_sampling_evals,
        optimizer_evals=state.counter.count - state.initial_evals,
        initial_evals=state.initial_evals,
        theta0=theta0,
        theta_final=state.theta,
    )


def compute_n_ca(
    trajectory: list[MetricsRecord], initial_evals: int, threshold: float
) -> int | None:
    """First-crossing cost in counted evaluations (see warm_start_post_train)."""
    for rec in trajectory:
        if rec.error_vs_exact is None:
            return None
        if rec.error_vs_exact <= threshold:
            if rec.iteration == 0:
                return initial_evals
            return rec.cumulative_evaluations - initial_evals
    return None


# -- mode handlers -------------------------------------------------------------


def _write_summary(out_dir: str, payload: dict) -> str:
    path = os.path.join(out_dir, "summary.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    return path


def _write_metrics(out_dir: str, records: list[MetricsRecord], csv: bool) -> str:
    path = os.path.join(out_dir, "metrics.jsonl")
    write_jsonl(path, records)
    if csv:
        write_csv(os.path.join(out_dir, "metrics.csv"), records)
    return path


def _run_gen_tfim(config: RunConfig) -> int:
    n = int(config.tfim["n"])
    J = float(config.tfim.get("J", 1.0))
    g_values = [float(g) for g in config.tfim["g_values"]]
    files = []
    for g in g_values:
        h = tfim(n, J, g)
        exact = exact_ground_energy(h)
        reference = expectation(prepare_basis(n, "0" * n), h, None)
        h = Hamiltonian(
            h.n_qubits, h.terms, h.family_id, h.instance_label,
            ref_energies={"hf": reference, "exact": exact},
        )
        name = f"tfim_n{n}_J{J:g}_g{g:g}.json"
        path = os.path.join(config.out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(serialize_hamiltonian(h))
        files.append({"path": path, "g": g, "exact": exact, "hf": reference})
    _write_summary(config.out_dir, {
        "run_id": config.run_id(), "mode": config.mode,
        "family_id": f"tfim-n{n}", "J": J, "files": files,
    })
    print(f"wrote {len(files)} Hamiltonian files to {config.out_dir}")
    return 0


def _run_exact(config: RunConfig) -> int:
    h = _load_instances(config.instance_paths())[0]
    energy = exact_ground_energy(h)
    _write_summary(config.out_dir, {
        "run_id": config.run_id(), "mode": config.mode,
        "instance_label": h.instance_label, "family_id": h.family_id,
        "n_qubits": h.n_qubits, "exact_ground_energy": energy,
    })
    print(f"exact ground energy: {energy:.12f}")
    return 0


def _run_vqe(config: RunConfig) -> int:
    h = _load_instances(config.instance_paths())[0]
    spec = spec_from_dict(config.ansatz)
    opt = config.optimizer
    d = param_count(spec)
    theta0 = np.asarray(config.theta0, dtype=float) if config.theta0 else np.zeros(d)
    exact = _exact_for(h)
    trajectory, state = run_optimizer(
        opt.get("method", "ADAM"),
        spec,
        h,
        theta0,
        float(opt.get("lr", 0.02)),
        int(opt.get("max_iters", 1000)),
        stop_accuracy=config.accuracy_threshold,
        exact_energy=exact,
        eps=float(opt.get("eps", 0.01)),
        seed=config.seed,
        run_id=config.run_id(),
        mode=config.mode,
    )
    _write_metrics(config.out_dir, trajectory, config.csv)
    errors = [r.error_vs_exact for r in trajectory if r.error_vs_exact is not None]
    _write_summary(config.out_dir, {
        "run_id": config.run_id(), "mode": config.mode, "seed": config.seed,
        "instance_label": h.instance_label,
        "method": opt.get("method", "ADAM"), "lr": opt.get("lr", 0.02),
        "d": d,
        "iterations": state.iteration,
        "initial_evals": state.initial_evals,
        "optimizer_evals": state.counter.count - state.initial_evals,
        "total_evals": state.counter.count,
        "n_ca": compute_n_ca(trajectory, state.initial_evals, config.accuracy_threshold),
        "delta_e_min": min(errors) if errors else None,
        "final_energy": trajectory[-1].energy,
        "exact": exact,
        "theta_final": [float(v) for v in state.theta],
    })
    print(f"final energy {trajectory[-1].energy:.8f} after {state.iteration} iterations")
    return 0


def _run_flow(config: RunConfig) -> int:
    instances = _load_instances(config.instance_paths())
    if config.mode == "flow-s":
        instances = instances[:1]
    family_ids = {h.family_id for h in instances}
    if len(family_ids) > 1:
        raise ConfigError(f"instances span multiple families: {sorted(family_ids)}")
    term_order = family_term_order(instances)
    spec = spec_from_dict(config.ansatz)
    d = param_count(spec)
    default_layers = FLOW_S_LAYERS if config.mode == "flow-s" else FLOW_M_LAYERS
    flow_cfg = _flow_config(d, len(term_order), config.flow, default_layers)
    model = FlowModel(flow_cfg, seed=config.seed)
    train_cfg = _train_config(config.train, config.seed)
    contexts = [(context_of(h, term_order), h) for h in instances]
    counter = EvalCounter()
    t0 = time.perf_counter()
    model, trajectory = train_flow_vqe(
        model, contexts, spec, train_cfg,
        counter=counter, run_id=config.run_id(), mode=config.mode,
    )
    ckpt_path = os.path.join(config.out_dir, "model.json")
    save_checkpoint(
        ckpt_path, model, term_order, spec_to_dict(spec),
        meta={"family_id": instances[0].family_id, "mode": config.mode, "seed": config.seed},
    )
    _write_metrics(config.out_dir, trajectory, config.csv)
    per_context = {}
    for rec in trajectory:
        per_context[rec.instance_label] = {
            "best_energy": rec.best_energy, "error_vs_exact": rec.error_vs_exact,
        }
    _write_summary(config.out_dir, {
        "run_id": config.run_id(), "mode": config.mode, "seed": config.seed,
        "family_id": instances[0].family_id,
        "n_contexts": len(contexts),
        "d": d,
        "n_trainable": model.n_trainable,
        "epochs_run": max(r.iteration for r in trajectory),
        "total_evals": counter.count,
        "final": per_context,
        "checkpoint": ckpt_path,
        "wall_ms": (time.perf_counter() - t0) * 1e3,
    })
    print(
        f"trained on {len(contexts)} context(s); best energies: "
        + ", ".join(f"{k}: {v['best_energy']:.6f}" for k, v in per_context.items())
    )
    return 0


def _run_generate(config: RunConfig) -> int:
    model, term_order, ansatz_dict, meta = load_checkpoint(config.checkpoint)
    spec = spec_from_dict(ansatz_dict)
    instances = _load_instances(config.instance_paths())
    counter = EvalCounter()
    results = generate_pes(
        model, term_order, meta.get("family_id", ""), instances, spec,
        samples_per_point=config.samples_per_point, seed=config.seed, counter=counter,
    )
    records = [
        MetricsRecord(
            run_id=config.run_id(), mode=config.mode,
            instance_label=row["instance_label"], iteration=0,
            energy=row["e_mean"], best_energy=row["e_min"],
            error_vs_exact=row["error_min"],
            cumulative_evaluations=row["cumulative_evaluations"],
            loss=None, wall_ms=0.0,
        )
        for row in results
    ]
    _write_metrics(config.out_dir, records, config.csv)
    errors = [row["error_min"] for row in results if row["error_min"] is not None]
    _write_summary(config.out_dir, {
        "run_id": config.run_id(), "mode": config.mode, "seed": config.seed,
        "checkpoint": config.checkpoint,
        "samples_per_point": config.samples_per_point,
        "total_evals": counter.count,
        "median_error_min": float(np.median(errors)) if errors else None,
        "instances": [
            {k: row[k] for k in ("instance_label", "e_min", "e_mean", "error_min", "exact")}
            for row in results
        ],
    })
    print(f"generated {config.samples_per_point} samples for {len(results)} instance(s)")
    return 0


def _run_warm_start(config: RunConfig) -> int:
    h = _load_instances(config.instance_paths())[0]
    spec = spec_from_dict(config.ansatz)
    opt = config.optimizer
    model = None
    term_order = None
    family_id = ""
    transfer_theta = None
    if config.init == "flow":
        model, term_order, ckpt_ansatz, meta = load_checkpoint(config.checkpoint)
        family_id = meta.get("family_id", "")
        if ckpt_ansatz != spec_to_dict(spec):
            raise ConfigError("checkpoint ansatz does not match config ansatz")
    elif config.init == "transfer":
        with open(config.transfer_source, encoding="utf-8") as fh:
            source = json.load(fh)
        key = "theta_final" if "theta_final" in source else "theta"
        if key not in source:
            raise ConfigError("transfer_source must contain 'theta' or 'theta_final'")
        transfer_theta = np.asarray(source[key], dtype=float)
    result = warm_start_post_train(
        config.init,
        spec,
        h,
        method=opt.get("method", "ADAM"),
        lr=float(opt.get("lr", 0.02)),
        budget=int(opt.get("max_iters", 1000)),
        accuracy_threshold=config.accuracy_threshold,
        model=model,
        term_order=term_order,
        family_id=family_id,
        samples_per_point=config.samples_per_point,
        transfer_theta=transfer_theta,
        seed=config.seed,
        eps=float(opt.get("eps", 0.01)),
        run_id=config.run_id(),
        mode=config.mode,
    )
    _write_metrics(config.out_dir, result.trajectory, config.csv)
    _write_summary(config.out_dir, {
        "run_id": config.run_id(), "mode": config.mode, "seed": config.seed,
        "instance_label": h.instance_label,
        "init": config.init,
        "method": opt.get("method", "ADAM"), "lr": opt.get("lr", 0.02),
        "accuracy_threshold": config.accuracy_threshold,
        "n_ca": result.n_ca,
        "reached_accuracy": result.n_ca is not None,
        "delta_e_min": result.delta_e_min,
        "init_energy": result.init_energy,
        "init_sampling_evals": result.init_sampling_evals,
        "initial_evals": result.initial_evals,
        "optimizer_evals": result.optimizer_evals,
        "theta_final": [float(v) for v in result.theta_final],
    })
    n_ca = "not reached" if result.n_ca is None else result.n_ca
    print(f"init={config.init}: N_ca={n_ca}, min error={result.delta_e_min}")
    return 0


def _run_cost_report(config: RunConfig) -> int:
    cost = config.cost
    for key in ("c_pre", "post_costs", "vqe_costs"):
        if key not in cost:
            raise ConfigError(f"cost config requires field {key!r}")
    report = cost_report(cost["c_pre"], cost["post_costs"], cost["vqe_costs"])
    _write_summary(config.out_dir, {
        "run_id": config.run_id(), "mode": config.mode, **asdict(report),
    })
    be = "none" if report.break_even is None else report.break_even
    print(
        f"C_pre={report.c_pre:g}, C_post_bar={report.c_post_bar:g}, "
        f"C_vqe_bar={report.c_vqe_bar:g}, break-even at n={be}"
    )
    return 0


def _run_geometry(config: RunConfig) -> int:
    atoms = geometry(config.molecule, float(config.distance))
    name = f"{config.molecule.lower()}_d{float(config.distance):g}.xyz"
    path = os.path.join(config.out_dir, name)
    comment = f"{config.molecule} d={float(config.distance):g}"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_xyz(atoms, comment))
    _write_summary(config.out_dir, {
        "run_id": config.run_id(), "mode": config.mode,
        "molecule": config.molecule, "distance": config.distance,
        "xyz": path,
        "atoms": [{"element": el, "x": x, "y": y, "z": z} for el, x, y, z in atoms],
    })
    print(f"wrote {path}")
    return 0


_HANDLERS = {
    "gen-tfim": _run_gen_tfim,
    "exact": _run_exact,
    "vqe": _run_vqe,
    "flow-s": _run_flow,
    "flow-m": _run_flow,
    "generate": _run_generate,
    "warm-start": _run_warm_start,
    "cost-report": _run_cost_report,
    "geometry": _run_geometry,
}


def run(config: RunConfig) -> int:
    """Validate, dispatch, and execute one run; returns the exit status."""
    config.validate()
    os.makedirs(config.out_dir, exist_ok=True)
    return _HANDLERS[config.mode](config)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="flowgen-vqe",
        description="Flow-based warm starts for variational eigensolvers.",
    )
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True, help="path to run-config JSON")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--out", default=None, help="override output directory")
    parser.add_argument("--csv", action="store_true", help="also export metrics as CSV")
    args = parser.parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            obj = json.load(fh)
        obj["mode"] = args.mode
        if args.seed is not None:
            obj["seed"] = args.seed
        if args.out is not None:
            obj["out_dir"] = args.out
        if args.csv:
            obj["csv"] = True
        config = RunConfig.from_dict(obj)
        return run(config)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
