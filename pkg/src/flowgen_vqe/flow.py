"""Conditional Gaussianization flow over circuit-parameter vectors.

The generator composes K blocks of [orthogonal rotation, element-wise marginal
map]. Rotations are products of Householder reflections; each marginal map is
Psi(x) = PhiInv(F(x)) with F a logistic-mixture CDF whose anchors and
log-bandwidths are emitted, per flow layer, by a conditioning MLP reading a
linear embedding of the Hamiltonian-coefficient context. The base distribution
is N(0, base_var * I), so an untrained (identity-calibrated) flow samples
tightly around the zero parameter vector - the reference-state initialization
of both ansatz families.

Direction naming: `forward` is generation (latent -> parameters, closed form);
`inverse` is the training direction (parameters -> latent), which inverts each
marginal map by safeguarded Newton-bisection root finding. Gradients through
the root use the implicit-function relation, realized by one detached Newton
step so that reverse-mode autodiff recovers d(root)/d(param) = -(dF/dparam)/F'.

All tensors are float64; sampling and model construction are deterministic
given their seeds.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
import torch
from scipy.special import expit as _np_sigmoid

from .hamiltonian import ContextVector

_LOG_2PI = math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)

#: Logistic scale at which PhiInv(F(x)) has unit slope at the origin, making a
#: zero-anchor marginal layer an identity map to better than 0.1% over the
#: base distribution's support.
IDENTITY_BANDWIDTH = math.sqrt(2.0 * math.pi) / 4.0


class FlowNumericsError(RuntimeError):
    """Non-finite intermediate or failed marginal inversion."""


@dataclass(frozen=True)
class FlowConfig:
    """Shape and numeric hyperparameters of the flow.

    Defaults follow the reference setup: 32 logistic components, conditioning
    MLPs with three 256-unit hidden layers, base variance 0.01. Context values
    are multiplied by `context_scale` before the linear embedding (coefficient
    normalization is left as a tunable).
    """

    dim: int
    context_dim: int
    n_layers: int
    n_components: int = 32
    embed_dim: int = 16
    n_reflections: int | None = None
    hidden_width: int = 256
    n_hidden: int = 3
    base_var: float = 0.01
    context_scale: float = 1.0
    shared_conditioner: bool = False
    anchor_init_std: float = 0.1
    cdf_clamp: float = 1e-7
    root_tol: float = 1e-12
    max_root_iters: int = 200

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.n_layers < 0:
            raise ValueError("layer count must be non-negative")
        if self.n_components < 1:
            raise ValueError("need at least one mixture component")
        if self.base_var <= 0:
            raise ValueError("base variance must be positive")

    @property
    def reflections(self) -> int:
        return self.dim if self.n_reflections is None else self.n_reflections


def _init_linear(lin: torch.nn.Linear, gen: torch.Generator) -> None:
    bound = 1.0 / math.sqrt(lin.in_features)
    with torch.no_grad():
        lin.weight.uniform_(-bound, bound, generator=gen)
        lin.bias.uniform_(-bound, bound, generator=gen)


def _mixture_cdf(x: torch.Tensor, mu: torch.Tensor, logh: torch.Tensor) -> torch.Tensor:
    t = (x.unsqueeze(-1) - mu) * torch.exp(-logh)
    return torch.sigmoid(t).mean(dim=-1)


def _mixture_log_pdf(x: torch.Tensor, mu: torch.Tensor, logh: torch.Tensor) -> torch.Tensor:
    t = (x.unsqueeze(-1) - mu) * torch.exp(-logh)
    log_terms = -torch.nn.functional.softplus(t) - torch.nn.functional.softplus(-t) - logh
    return torch.logsumexp(log_terms, dim=-1) - math.log(mu.shape[-1])


def _std_normal_cdf(u: torch.Tensor) -> torch.Tensor:
    return 0.5 * (1.0 + torch.erf(u / _SQRT2))


def _std_normal_icdf(c: torch.Tensor) -> torch.Tensor:
    return _SQRT2 * torch.erfinv(2.0 * c - 1.0)


def _std_normal_log_pdf(u: torch.Tensor) -> torch.Tensor:
    return -0.5 * u * u - 0.5 * _LOG_2PI


def _invert_mixture_cdf(
    mu: np.ndarray,
    h: np.ndarray,
    target: np.ndarray,
    tol: float,
    max_iters: int,
) -> np.ndarray:
    """Solve F(x) = target per entry by bracketed Newton-bisection.

    mu, h: (..., P); target in (0, 1), shape (...). The initial bracket
    [min(mu - 30h), max(mu + 30h)] always contains the root because
    sigmoid(-30) is far below the CDF clamp floor.
    """

    def cdf(x):
        return _np_sigmoid((x[..., None] - mu) / h).mean(axis=-1)

    def pdf(x):
        s = _np_sigmoid((x[..., None] - mu) / h)
        return (s * (1.0 - s) / h).mean(axis=-1)

    lo = (mu - 30.0 * h).min(axis=-1)
    hi = (mu + 30.0 * h).max(axis=-1)
    for _ in range(64):  # safeguard; the initial bracket should already hold
        too_high = cdf(lo) > target
        too_low = cdf(hi) < target
        if not (too_high.any() or too_low.any()):
            break
        width = hi - lo
        lo = np.where(too_high, lo - width, lo)
        hi = np.where(too_low, hi + width, hi)

    x = 0.5 * (lo + hi)
    resid = cdf(x) - target
    for it in range(max_iters):
        done = np.abs(resid) < tol
        if done.all():
            break
        lo = np.where(resid < 0, x, lo)
        hi = np.where(resid < 0, hi, x)
        if it < 18:
            x_new = 0.5 * (lo + hi)  # pure bisection while the bracket is wide
        else:
            slope = pdf(x)
            with np.errstate(divide="ignore", invalid="ignore"):
                newton = x - resid / slope
            inside = (newton > lo) & (newton < hi) & np.isfinite(newton)
            x_new = np.where(inside, newton, 0.5 * (lo + hi))
        x = np.where(done, x, x_new)
        resid = np.where(done, resid, cdf(x) - target)
    else:
        raise FlowNumericsError(
            f"marginal inversion did not converge within {max_iters} iterations "
            f"(worst residual {np.abs(resid).max():.3e})"
        )
    return x


class FlowModel(torch.nn.Module):
    """Conditional Gaussianization flow with a flat trainable-parameter view.

    Trainables: the context embedding (when K >= 1), per-layer Householder
    vectors, and per-layer conditioning MLPs whose outputs are the marginal
    anchors and log-bandwidths. The conditioner output layer starts at zero
    weight with identity-calibrated biases, so the untrained flow stays near
    the base distribution.
    """

    def __init__(self, config: FlowConfig, seed: int = 0):
        super().__init__()
        self.config = config
        gen = torch.Generator().manual_seed(int(seed))
        d, P, K = config.dim, config.n_components, config.n_layers

        self.householder = torch.nn.ParameterList()
        conditioners = []
        if K >= 1:
            self.embed = torch.nn.Linear(config.context_dim, config.embed_dim, dtype=torch.float64)
            _init_linear(self.embed, gen)
        else:
            self.embed = None
        n_cond = 1 if config.shared_conditioner else K
        for _ in range(K):
            vecs = torch.empty(config.reflections, d, dtype=torch.float64)
            vecs.normal_(generator=gen)
            vecs /= vecs.norm(dim=1, keepdim=True)
            self.householder.append(torch.nn.Parameter(vecs))
        for _ in range(n_cond if K >= 1 else 0):
            layers: list[torch.nn.Module] = []
            width_in = config.embed_dim
            for _ in range(config.n_hidden):
                lin = torch.nn.Linear(width_in, config.hidden_width, dtype=torch.float64)
                _init_linear(lin, gen)
                layers += [lin, torch.nn.ELU()]
                width_in = config.hidden_width
            out = torch.nn.Linear(width_in, 2 * P * d, dtype=torch.float64)
            with torch.no_grad():
                out.weight.zero_()
                bias = out.bias.view(2, d, P)
                bias[0].normal_(generator=gen)
                bias[0] *= config.anchor_init_std
                bias[1].fill_(math.log(IDENTITY_BANDWIDTH))
            layers.append(out)
            conditioners.append(torch.nn.Sequential(*layers))
        self.conditioners = torch.nn.ModuleList(conditioners)

    # -- trainable-parameter plumbing ------------------------------------

    @property
    def n_trainable(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def get_tau(self) -> np.ndarray:
        if self.n_trainable == 0:
            return np.zeros(0)
        return np.concatenate([p.detach().numpy().ravel().copy() for p in self.parameters()])

    def set_tau(self, tau: np.ndarray) -> None:
        tau = np.asarray(tau, dtype=float)
        if tau.shape != (self.n_trainable,):
            raise ValueError(f"tau has length {tau.shape}, expected ({self.n_trainable},)")
        offset = 0
        with torch.no_grad():
            for p in self.parameters():
                k = p.numel()
                p.copy_(torch.from_numpy(tau[offset:offset + k].reshape(p.shape)))
                offset += k

    # -- context and marginal parameters ---------------------------------

    def _context_tensor(self, context, batch: int) -> torch.Tensor:
        values = context.values if isinstance(context, ContextVector) else np.asarray(context, float)
        if values.ndim == 1:
            values = np.broadcast_to(values, (batch, values.shape[0]))
        if values.shape != (batch, self.config.context_dim):
            raise ValueError(
                f"context has shape {values.shape}, expected ({batch}, {self.config.context_dim})"
            )
        return torch.from_numpy(np.ascontiguousarray(values * self.config.context_scale))

    def _marginal_params(self, ctx: torch.Tensor) -> list[tuple[torch.Tensor, torch.Tensor]]:
        """Per-layer (anchors, log-bandwidths), each (B, d, P)."""
        d, P = self.config.dim, self.config.n_components
        if self.embed is None:
            return []
        e = self.embed(ctx)
        params = []
        for i in range(self.config.n_layers):
            cond = self.conditioners[0 if self.config.shared_conditioner else i]
            out = cond(e).view(-1, 2, d, P)
            params.append((out[:, 0], out[:, 1]))
        return params

    # -- rotations --------------------------------------------------------

    def _rotate(self, x: torch.Tensor, layer: int) -> torch.Tensor:
        for v in self.householder[layer]:
            x = x - 2.0 * torch.outer(x @ v, v) / (v @ v)
        return x

    def _rotate_back(self, x: torch.Tensor, layer: int) -> torch.Tensor:
        vecs = self.householder[layer]
        for j in range(len(vecs) - 1, -1, -1):
            v = vecs[j]
            x = x - 2.0 * torch.outer(x @ v, v) / (v @ v)
        return x

    def rotation_matrix(self, layer: int) -> np.ndarray:
        eye = torch.eye(self.config.dim, dtype=torch.float64)
        return self._rotate(eye, layer).detach().numpy().T

    # -- core maps (batched tensors) --------------------------------------

    def _forward_t(self, z: torch.Tensor, ctx: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Generation direction; returns (theta, log|det J_forward|)."""
        clamp = self.config.cdf_clamp
        x = z
        logdet = torch.zeros(x.shape[0], dtype=torch.float64)
        for layer, (mu, logh) in enumerate(self._marginal_params(ctx)):
            x = self._rotate(x, layer)
            cdf = _mixture_cdf(x, mu, logh).clamp(clamp, 1.0 - clamp)
            y = _std_normal_icdf(cdf)
            logdet = logdet + (_mixture_log_pdf(x, mu, logh) - _std_normal_log_pdf(y)).sum(dim=1)
            if not torch.isfinite(y).all():
                raise FlowNumericsError(f"non-finite value leaving flow layer {layer}")
            x = y
        return x, logdet

    def _inverse_t(self, theta: torch.Tensor, ctx: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Training direction; returns (z, log|det J_inverse|)."""
        cfg = self.config
        clamp = cfg.cdf_clamp
        params = self._marginal_params(ctx)
        x = theta
        logdet = torch.zeros(x.shape[0], dtype=torch.float64)
        for layer in range(cfg.n_layers - 1, -1, -1):
            mu, logh = params[layer]
            u = x
            cdf_target = _std_normal_cdf(u).clamp(clamp, 1.0 - clamp)
            with torch.no_grad():
                root = _invert_mixture_cdf(
                    mu.detach().numpy(),
                    np.exp(logh.detach().numpy()),
                    cdf_target.detach().numpy(),
                    cfg.root_tol,
                    cfg.max_root_iters,
                )
            x0 = torch.from_numpy(root)
            # one Newton step off the detached root: value-identical at
            # convergence, and autodiff through it yields the exact
            # implicit-function derivatives of the root
            pdf0 = torch.exp(_mixture_log_pdf(x0, mu, logh))
            x_in = x0 - (_mixture_cdf(x0, mu, logh) - cdf_target) / pdf0
            logdet = logdet + (_std_normal_log_pdf(u) - _mixture_log_pdf(x_in, mu, logh)).sum(dim=1)
            if not torch.isfinite(x_in).all():
                raise FlowNumericsError(f"non-finite value leaving flow layer {layer} (inverse)")
            x = self._rotate_back(x_in, layer)
        return x, logdet

    def _base_log_pdf(self, z: torch.Tensor) -> torch.Tensor:
        var = self.config.base_var
        return -0.5 * (z * z).sum(dim=1) / var - 0.5 * self.config.dim * math.log(2.0 * math.pi * var)

    def _log_prob_t(self, theta: torch.Tensor, ctx: torch.Tensor) -> torch.Tensor:
        z, logdet = self._inverse_t(theta, ctx)
        return self._base_log_pdf(z) + logdet

    # -- public single-vector API -----------------------------------------

    def forward_map(self, z: np.ndarray, context) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        with torch.no_grad():
            theta, _ = self._forward_t(torch.from_numpy(z), self._context_tensor(context, z.shape[0]))
        return theta.numpy()[0] if z.shape[0] == 1 else theta.numpy()

    def inverse_map(self, theta: np.ndarray, context) -> tuple[np.ndarray, float]:
        arr = np.atleast_2d(np.asarray(theta, dtype=float))
        with torch.no_grad():
            z, logdet = self._inverse_t(torch.from_numpy(arr), self._context_tensor(context, arr.shape[0]))
        if arr.shape[0] == 1:
            return z.numpy()[0], float(logdet.numpy()[0])
        return z.numpy(), logdet.numpy()

    def log_prob(self, theta: np.ndarray, context) -> float:
        z, logdet = self.inverse_map(theta, context)
        z = np.atleast_2d(z)
        base = (
            -0.5 * (z * z).sum(axis=1) / self.config.base_var
            - 0.5 * self.config.dim * math.log(2.0 * math.pi * self.config.base_var)
        )
        out = base + np.atleast_1d(logdet)
        return float(out[0]) if out.shape[0] == 1 else out

    def sample(
        self, context, count: int, rng: np.random.Generator
    ) -> list[tuple[np.ndarray, float]]:
        """Draw (theta, logp) pairs; deterministic given the rng state."""
        if count < 1:
            raise ValueError("count must be >= 1")
        z = rng.normal(0.0, math.sqrt(self.config.base_var), size=(count, self.config.dim))
        zt = torch.from_numpy(z)
        with torch.no_grad():
            theta, logdet_fwd = self._forward_t(zt, self._context_tensor(context, count))
            logp = self._base_log_pdf(zt) - logdet_fwd
        theta = theta.numpy()
        logp = logp.numpy()
        return [(theta[i].copy(), float(logp[i])) for i in range(count)]

    # -- training objective -------------------------------------------------

    def nll_and_grad(self, batch: list[tuple[np.ndarray, object]]) -> tuple[float, np.ndarray]:
        """Mean negative log-likelihood of (theta, context) pairs and its
        exact gradient with respect to the flat trainable vector."""
        if not batch:
            raise ValueError("empty batch")
        thetas = np.stack([np.asarray(t, dtype=float) for t, _ in batch])
        ctx_rows = np.stack([
            (c.values if isinstance(c, ContextVector) else np.asarray(c, float)) for _, c in batch
        ])
        ctx = torch.from_numpy(ctx_rows * self.config.context_scale)
        if self.n_trainable == 0:
            with torch.no_grad():
                loss = -self._log_prob_t(torch.from_numpy(thetas), ctx).mean()
            return float(loss), np.zeros(0)
        self.zero_grad(set_to_none=True)
        loss = -self._log_prob_t(torch.from_numpy(thetas), ctx).mean()
        loss.backward()
        grads = []
        for p in self.parameters():
            if p.grad is None:
                grads.append(np.zeros(p.numel()))
            else:
                grads.append(p.grad.detach().numpy().ravel().copy())
        self.zero_grad(set_to_none=True)
        return float(loss.detach()), np.concatenate(grads)


# -- module-level aliases matching the operation names ----------------------


def forward(model: FlowModel, z: np.ndarray, context) -> np.ndarray:
    return model.forward_map(z, context)


def inverse(model: FlowModel, theta: np.ndarray, context) -> tuple[np.ndarray, float]:
    return model.inverse_map(theta, context)


def log_prob(model: FlowModel, theta: np.ndarray, context) -> float:
    return model.log_prob(theta, context)


def sample(model: FlowModel, context, count: int, rng: np.random.Generator):
    return model.sample(context, count, rng)


def nll_and_grad(model: FlowModel, batch) -> tuple[float, np.ndarray]:
    return model.nll_and_grad(batch)


# -- checkpointing ------------------------------------------------------------

CHECKPOINT_VERSION = 1


def checkpoint_payload(model: FlowModel, term_order, ansatz: dict, meta: dict | None = None) -> dict:
    tau = model.get_tau()
    return {
        "format_version": CHECKPOINT_VERSION,
        "flow_config": asdict(model.config),
        "term_order": list(term_order),
        "ansatz": ansatz,
        "meta": meta or {},
        "n_trainable": int(model.n_trainable),
        "tau_dtype": "<f8",
        "tau_b64": base64.b64encode(tau.astype("<f8").tobytes()).decode("ascii"),
    }


def save_checkpoint(path, model: FlowModel, term_order, ansatz: dict, meta: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(checkpoint_payload(model, term_order, ansatz, meta), fh)


def load_checkpoint(path) -> tuple[FlowModel, tuple[str, ...], dict, dict]:
    """Returns (model, term_order, ansatz dict, meta). Restoring tau byte for
    byte makes log_prob reproduce bit-identically."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('format_version')!r}")
    config = FlowConfig(**payload["flow_config"])
    model = FlowModel(config, seed=0)
    tau = np.frombuffer(base64.b64decode(payload["tau_b64"]), dtype="<f8").astype(float)
    if tau.shape[0] != payload["n_trainable"]:
        raise ValueError("checkpoint parameter count mismatch")
    model.set_tau(tau)
    return model, tuple(payload["term_order"]), payload["ansatz"], payload.get("meta", {})
