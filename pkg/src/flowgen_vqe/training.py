"""Preference-based flow training and its policy-gradient alternative.

One training epoch, per conditioning context: draw a small batch from the
flow, evaluate circuit energies, and keep the lowest-energy samples in a
per-context elite buffer of capacity M. The pooled buffer contents (with
fresh Gaussian noise on the copies fed to the loss, never on the stored
winners) form the maximum-likelihood batch for a single Adam step on the flow
parameters. Energies only ever enter through the preference ordering, so the
winner sequence is invariant under constant shifts of the Hamiltonian.

RNG streams are derived per (epoch, context, purpose) from the run seed, so
any evaluation schedule produces identical samples.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .ansatz import AnsatzSpec, prepare_state
from .flow import FlowModel
from .hamiltonian import DEFAULT_DENSE_CAP, ContextVector, Hamiltonian, exact_ground_energy
from .metrics import MetricsRecord
from .simulator import EvalCounter, expectation


@dataclass
class TrainConfig:
    """Flow-VQE training hyperparameters (defaults follow the reference
    small-budget setup: B = M = 2, lr and weight decay 1e-4, winner noise
    variance 1e-3)."""

    epochs: int
    batch_size: int = 2
    buffer_size: int = 2
    lr: float = 1e-4
    weight_decay: float = 1e-4
    winner_noise_var: float = 1e-3
    seed: int = 0
    stop_accuracy: float | None = None

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.buffer_size < 1:
            raise ValueError("epochs, batch size, and buffer size must be >= 1")
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if self.winner_noise_var < 0:
            raise ValueError("winner noise variance must be >= 0")


class EliteBuffer:
    """Per-context archive of the lowest-energy (theta, E) pairs.

    Entries stay sorted ascending by energy with ties broken by insertion
    order (earlier sample wins), so truncation to capacity is deterministic.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._entries: dict[object, list[tuple[float, int, np.ndarray]]] = {}
        self._seq = 0

    def insert(self, context_key, theta: np.ndarray, energy: float) -> None:
        if not np.isfinite(energy):
            raise ValueError(f"non-finite energy {energy!r} for context {context_key!r}")
        entries = self._entries.setdefault(context_key, [])
        entries.append((float(energy), self._seq, np.array(theta, dtype=float, copy=True)))
        self._seq += 1
        entries.sort(key=lambda e: (e[0], e[1]))
        del entries[self.capacity:]

    def winners(self, context_key) -> list[tuple[np.ndarray, float]]:
        return [(theta, energy) for energy, _, theta in self._entries.get(context_key, [])]

    def best_energy(self, context_key) -> float:
        entries = self._entries.get(context_key)
        if not entries:
            raise KeyError(f"no entries for context {context_key!r}")
        return entries[0][0]

    def contexts(self) -> list:
        return list(self._entries)

    def __len__(self) -> int:
        return sum(len(v) for v in self._entries.values())


def buffer_insert(buf: EliteBuffer, context_key, theta: np.ndarray, energy: float) -> EliteBuffer:
    buf.insert(context_key, theta, energy)
    return buf


def perturb_winners(
    winners: list[np.ndarray], var: float, rng: np.random.Generator
) -> list[np.ndarray]:
    """Element-wise N(0, var) noise on copies; the originals are untouched."""
    if var < 0:
        raise ValueError("noise variance must be >= 0")
    if var == 0:
        return [np.array(w, dtype=float, copy=True) for w in winners]
    std = np.sqrt(var)
    return [np.asarray(w, dtype=float) + rng.normal(0.0, std, size=np.shape(w)) for w in winners]


@dataclass
class AdamState:
    """First/second-moment accumulators for a flat parameter vector."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(m=np.zeros(n), v=np.zeros(n))


def adam_update(
    tau: np.ndarray,
    grad: np.ndarray,
    state: AdamState,
    lr: float,
    weight_decay: float = 0.0,
) -> tuple[np.ndarray, AdamState]:
    """Bias-corrected Adam step with coupled L2 (decay added to the gradient).

    The state is updated in place and returned alongside the new parameters.
    """
    tau = np.asarray(tau, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if tau.shape != grad.shape or tau.shape != state.m.shape:
        raise ValueError("parameter/gradient/state length mismatch")
    g = grad + weight_decay * tau if weight_decay else grad
    state.step += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * g
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    m_hat = state.m / (1.0 - state.beta1 ** state.step)
    v_hat = state.v / (1.0 - state.beta2 ** state.step)
    return tau - lr * m_hat / (np.sqrt(v_hat) + state.eps), state


def rng_for(seed: int, *path: int) -> np.random.Generator:
    """Deterministic child stream for a (seed, path) address."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))))


_PURPOSE_SAMPLE = 0
_PURPOSE_NOISE = 1


def train_flow_vqe(
    model: FlowModel,
    contexts: list[tuple[ContextVector, Hamiltonian]],
    spec: AnsatzSpec,
    cfg: TrainConfig,
    counter: EvalCounter | None = None,
    run_id: str = "flow",
    mode: str = "flow-s",
    exact_energies: list[float | None] | None = None,
) -> tuple[FlowModel, list[MetricsRecord]]:
    """Preference-optimization training loop.

    Per epoch and context: sample `batch_size` parameter vectors, evaluate
    their energies (one counted circuit evaluation each), update the context's
    elite buffer; afterwards pool all buffered winners, perturb the copies,
    take one Adam step on the mean negative log-likelihood. With a single
    context this is the direct-optimization regime; with several, the shared
    multi-instance regime.
    """
    if not contexts:
        raise ValueError("need at least one training context")
    for _, h in contexts:
        if h.n_qubits != spec.n_qubits:
            raise ValueError(
                f"Hamiltonian on {h.n_qubits} qubits does not match ansatz on {spec.n_qubits}"
            )
    counter = counter if counter is not None else EvalCounter()
    if exact_energies is None:
        exact_energies = [
            exact_ground_energy(h) if h.n_qubits <= DEFAULT_DENSE_CAP else None
            for _, h in contexts
        ]
    buffer = EliteBuffer(cfg.buffer_size)
    tau = model.get_tau()
    adam = AdamState.zeros(tau.shape[0])
    trajectory: list[MetricsRecord] = []
    t_start = time.perf_counter()

    for epoch in range(1, cfg.epochs + 1):
        epoch_batch_best: dict[int, float] = {}
        for k, (gamma, h) in enumerate(contexts):
            rng = rng_for(cfg.seed, _PURPOSE_SAMPLE, epoch, k)
            draws = model.sample(gamma, cfg.batch_size, rng)
            for theta, _logp in draws:
                energy = expectation(prepare_state(spec, theta), h, counter)
                if not np.isfinite(energy):
                    raise FloatingPointError(
                        f"non-finite energy at epoch {epoch}, context {k}"
                    )
                buffer.insert(k, theta, energy)
                epoch_batch_best[k] = min(energy, epoch_batch_best.get(k, np.inf))

        pooled: list[tuple[np.ndarray, ContextVector]] = []
        winner_thetas: list[np.ndarray] = []
        for k, (gamma, _h) in enumerate(contexts):
            for theta, _energy in buffer.winners(k):
                winner_thetas.append(theta)
                pooled.append((theta, gamma))
        noisy = perturb_winners(
            winner_thetas, cfg.winner_noise_var, rng_for(cfg.seed, _PURPOSE_NOISE, epoch)
        )
        loss, grad = model.nll_and_grad(
            [(noisy[i], pooled[i][1]) for i in range(len(pooled))]
        )
        if tau.shape[0]:
            tau, adam = adam_update(tau, grad, adam, cfg.lr, cfg.weight_decay)
            model.set_tau(tau)

        wall_ms = (time.perf_counter() - t_start) * 1e3
        for k, (_gamma, h) in enumerate(contexts):
            best = buffer.best_energy(k)
            exact = exact_energies[k]
            trajectory.append(
                MetricsRecord(
                    run_id=run_id,
                    mode=mode,
                    instance_label=h.instance_label,
                    iteration=epoch,
                    energy=epoch_batch_best[k],
                    best_energy=best,
                    error_vs_exact=None if exact is None else abs(best - exact),
                    cumulative_evaluations=counter.count,
                    loss=loss,
                    wall_ms=wall_ms,
                )
            )
        if cfg.stop_accuracy is not None and all(e is not None for e in exact_energies):
            worst = max(
                abs(buffer.best_energy(k) - exact_energies[k]) for k in range(len(contexts))
            )
            if worst <= cfg.stop_accuracy:
                break

    return model, trajectory


def reinforce_grad(
    model: FlowModel,
    gamma: ContextVector,
    samples: list[tuple[np.ndarray, float]],
    energies: list[float],
) -> np.ndarray:
    """Score-function estimate (1/N) sum_i E_i * grad log p(theta_i | gamma).

    Provided as the policy-gradient alternative for comparison runs; the
    preference loop above does not use it.
    """
    if len(samples) == 0:
        raise ValueError("need at least one sample")
    if len(samples) != len(energies):
        raise ValueError("samples and energies differ in length")
    import torch

    thetas = np.stack([np.asarray(t, dtype=float) for t, _ in samples])
    weights = torch.from_numpy(np.asarray(energies, dtype=float))
    ctx = model._context_tensor(gamma, thetas.shape[0])
    if model.n_trainable == 0:
        return np.zeros(0)
    model.zero_grad(set_to_none=True)
    logp = model._log_prob_t(torch.from_numpy(thetas), ctx)
    surrogate = (weights * logp).mean()
    surrogate.backward()
    grads = []
    for p in model.parameters():
        grads.append(
            p.grad.detach().numpy().ravel().copy() if p.grad is not None else np.zeros(p.numel())
        )
    model.zero_grad(set_to_none=True)
    return np.concatenate(grads)
