"""Reference VQE optimizers under exact circuit-evaluation accounting.

Cost model (the shot-independent unit being one energy expectation or one
state overlap): a gradient-descent or Adam iteration costs 2d evaluations
(two-sided shift or difference per parameter); a QNSPSA iteration costs
exactly 6 (two energies for the SPSA gradient, four overlaps for the
quantum-metric estimate). The single initial energy is counted on the same
counter but tracked separately, so both the inclusive and the bare-2dN
conventions are recoverable.

Per-iteration monitoring energies (used for trajectories, convergence checks
against the exact reference, and minimum-error reporting) deliberately bypass
the cost counter: benchmarking probes are treated as free, as the exact
reference itself is.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import sqrtm

from .ansatz import AnsatzSpec, HeaSpec, param_count, prepare_state, prepare_states
from .hamiltonian import Hamiltonian
from .metrics import MetricsRecord
from .simulator import EvalCounter, expectation, expectation_batch, overlap_batch
from .training import AdamState, adam_update

#: Central-difference step for non-RY (multi-frequency Givens) parameters.
GIVENS_DIFF_STEP = 1e-4

QNSPSA_EPSILON = 0.01
QNSPSA_REGULARIZATION = 1e-3
QNSPSA_SMOOTHING = 0.99


@dataclass
class VqeRunState:
    """Mutable state of one optimizer run."""

    theta: np.ndarray
    iteration: int = 0
    counter: EvalCounter = field(default_factory=EvalCounter)
    initial_evals: int = 0
    adam: AdamState | None = None
    metric: np.ndarray | None = None  # smoothed QNSPSA metric estimate


def _energy(spec: AnsatzSpec, h: Hamiltonian, theta: np.ndarray,
            counter: EvalCounter | None) -> float:
    return expectation(prepare_state(spec, theta), h, counter)


def energy_gradient(
    spec: AnsatzSpec, h: Hamiltonian, theta: np.ndarray, counter: EvalCounter | None = None
) -> np.ndarray:
    """Energy gradient at 2 evaluations per parameter (2d per call).

    RY parameters use the exact two-term parameter-shift rule. Givens-gate
    parameters have multi-frequency trigonometric dependence for which the
    exact rule needs four evaluations, so a central difference keeps the
    2-per-parameter budget at a documented accuracy tradeoff.
    """
    theta = np.asarray(theta, dtype=float)
    d = param_count(spec)
    if theta.shape != (d,):
        raise ValueError(f"parameter vector has shape {theta.shape}, expected ({d},)")
    grad = np.empty(d)
    exact_shift = isinstance(spec, HeaSpec)
    for i in range(d):
        step = np.pi / 2.0 if exact_shift else GIVENS_DIFF_STEP
        plus = theta.copy()
        plus[i] += step
        minus = theta.copy()
        minus[i] -= step
        e_plus = _energy(spec, h, plus, counter)
        e_minus = _energy(spec, h, minus, counter)
        if exact_shift:
            grad[i] = 0.5 * (e_plus - e_minus)
        else:
            grad[i] = (e_plus - e_minus) / (2.0 * step)
    return grad


def gd_step(state: VqeRunState, grad: np.ndarray, lr: float) -> VqeRunState:
    state.theta = state.theta - lr * np.asarray(grad, dtype=float)
    state.iteration += 1
    return state


def adam_vqe_step(state: VqeRunState, grad: np.ndarray, lr: float) -> VqeRunState:
    if state.adam is None:
        state.adam = AdamState.zeros(state.theta.shape[0])
    state.theta, state.adam = adam_update(state.theta, grad, state.adam, lr, weight_decay=0.0)
    state.iteration += 1
    return state


def _spsa_gradient(
    energy_fn, theta: np.ndarray, eps: float, delta: np.ndarray
) -> np.ndarray:
    """Two-evaluation simultaneous-perturbation gradient estimate."""
    e_plus = energy_fn(theta + eps * delta)
    e_minus = energy_fn(theta - eps * delta)
    return (e_plus - e_minus) / (2.0 * eps) * delta


def qnspsa_step(
    state: VqeRunState,
    spec: AnsatzSpec,
    h: Hamiltonian,
    lr: float,
    eps: float,
    rng: np.random.Generator,
) -> VqeRunState:
    """One QNSPSA iteration: exactly 6 counted circuit evaluations.

    Gradient from 2 energies at theta +- eps*D1; metric-tensor sample from 4
    state overlaps against |psi(theta)> at shifts {eps(D1+D2), eps D1,
    eps(-D1+D2), -eps D1}, combined by the second-order SPSA difference
    -dF/(8 eps^2) (D1 D2^T + D2 D1^T). The sample is folded into an
    exponentially smoothed metric, PSD-ified, regularized with lambda*I, and
    solved for the natural-gradient update.
    """
    theta = state.theta
    d = theta.shape[0]
    delta1 = rng.integers(0, 2, size=d) * 2.0 - 1.0
    delta2 = rng.integers(0, 2, size=d) * 2.0 - 1.0
    grad = _spsa_gradient(lambda t: _energy(spec, h, t, state.counter), theta, eps, delta1)

    base = prepare_state(spec, theta)
    shifts = [
        eps * delta1 + eps * delta2,
        eps * delta1,
        -eps * delta1 + eps * delta2,
        -eps * delta1,
    ]
    fids = [overlap(base, prepare_state(spec, theta + s), state.counter) for s in shifts]
    d_fid = fids[0] - fids[1] - fids[2] + fids[3]
    sample = -(np.outer(delta1, delta2) + np.outer(delta2, delta1)) * d_fid / (8.0 * eps ** 2)

    if state.metric is None:
        state.metric = np.eye(d)
    smoothed = QNSPSA_SMOOTHING * state.metric + (1.0 - QNSPSA_SMOOTHING) * sample
    state.metric = smoothed
    psd = np.real(sqrtm(smoothed @ smoothed))
    reg = psd + QNSPSA_REGULARIZATION * np.eye(d)
    try:
        update = np.linalg.solve(reg, grad)
    except np.linalg.LinAlgError as exc:  # unreachable with lambda > 0
        raise RuntimeError("singular regularized metric") from exc
    state.theta = theta - lr * update
    state.iteration += 1
    return state


def parameter_transfer(theta_source: np.ndarray, target_spec: AnsatzSpec) -> np.ndarray:
    """Warm start by reuse: the source optimum, unchanged, for a structurally
    identical target ansatz."""
    theta_source = np.asarray(theta_source, dtype=float)
    d = param_count(target_spec)
    if theta_source.shape != (d,):
        raise ValueError(
            f"source has {theta_source.shape[0] if theta_source.ndim == 1 else theta_source.shape} "
            f"parameters, target ansatz needs {d}"
        )
    return theta_source.copy()


def run_optimizer(
    method: str,
    spec: AnsatzSpec,
    h: Hamiltonian,
    theta0: np.ndarray,
    lr: float,
    max_iters: int,
    stop_accuracy: float | None = None,
    exact_energy: float | None = None,
    eps: float = QNSPSA_EPSILON,
    seed: int = 0,
    run_id: str = "vqe",
    mode: str = "vqe",
) -> tuple[list[MetricsRecord], VqeRunState]:
    """Iterate a baseline optimizer until the budget or the accuracy target.

    The trajectory starts with the counted initial energy; when an exact
    reference is given and `stop_accuracy` is set, the run stops at the first
    iteration whose monitored energy is within the target.
    """
    method = method.upper()
    if method not in {"GD", "ADAM", "QNSPSA"}:
        raise ValueError(f"unknown optimizer {method!r}")
    theta0 = np.asarray(theta0, dtype=float)
    d = param_count(spec)
    if theta0.shape != (d,):
        raise ValueError(f"theta0 has shape {theta0.shape}, expected ({d},)")
    state = VqeRunState(theta=theta0.copy())
    rng = np.random.default_rng(seed)
    t_start = time.perf_counter()

    energy0 = _energy(spec, h, state.theta, state.counter)
    state.initial_evals = state.counter.count
    best = energy0

    def record(iteration: int, energy: float) -> MetricsRecord:
        return MetricsRecord(
            run_id=run_id,
            mode=mode,
            instance_label=h.instance_label,
            iteration=iteration,
            energy=energy,
            best_energy=best,
            error_vs_exact=None if exact_energy is None else abs(energy - exact_energy),
            cumulative_evaluations=state.counter.count,
            loss=None,
            wall_ms=(time.perf_counter() - t_start) * 1e3,
        )

    trajectory = [record(0, energy0)]

    def converged(energy: float) -> bool:
        return (
            stop_accuracy is not None
            and exact_energy is not None
            and abs(energy - exact_energy) <= stop_accuracy
        )

    if converged(energy0):
        return trajectory, state

    for _ in range(max_iters):
        if method == "QNSPSA":
            state = qnspsa_step(state, spec, h, lr, eps, rng)
        else:
            grad = energy_gradient(spec, h, state.theta, state.counter)
            state = gd_step(state, grad, lr) if method == "GD" else adam_vqe_step(state, grad, lr)
        energy = _energy(spec, h, state.theta, None)  # benchmarking probe, uncounted
        best = min(best, energy)
        trajectory.append(record(state.iteration, energy))
        if converged(energy):
            break
    return trajectory, state
