"""Discretized self-contained Lagrangian evolution for the five models.

The continuum equations evolve the particle map X and its label gradient
G = dX/da against kernels applied to displacements X(a) - X(b), weighted by
data frozen at time zero (theta_0, omega_0, their label gradients).  The
discretization replaces label integrals by midpoint quadrature over a label
grid, realizes principal values by omitting the self term, and optionally
regularizes kernels with the analytic blob factor (1 - exp(-|y|^2/delta^2)).

Velocity densities per model (all sums run over source particles j != i):

* euler2d      u_i = sum w_j K2(Y_ij) omega0_j
* sqg          u_i = sum w_j Ksqg(Y_ij) theta0_j
* ipm          u_i = sum w_j K2(Y_ij) * (-{theta0, X_2}_j)
* boussinesq2d u_i = sum w_j K2(Y_ij) (omega0_j + W_j),  dW/dt = {theta0, X_2}
* euler3d      u_i = (1/4pi) sum w_j (G_j omega0_j) x Y_ij / |Y_ij|^3

with K2 the 2D Biot-Savart kernel and Ksqg the perp-Riesz kernel.  The label
gradient obeys dG/dt = (grad u) G, with grad u assembled from the model's
strain sum plus the local vorticity rotation (2D) or vorticity cross product
(3D).  All pairwise reductions use a fixed per-row summation order, so
results are bitwise independent of the worker-thread count.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, NumericalFailureError
from .kernels import normalize_model_tag

TWO_PI = 2.0 * math.pi
ROT90 = np.array([[0.0, -1.0], [1.0, 0.0]])

# models whose velocity needs the label gradient (or the Boussinesq
# accumulator) as part of the state
_GRADIENT_COUPLED = ("ipm", "boussinesq2d", "euler3d")


@dataclass
class ScalarField:
    """Sampler for scalar label data, optionally with an analytic gradient."""

    value: Callable[[np.ndarray], np.ndarray]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None


@dataclass
class VectorField:
    """Sampler for vector label data (3D vorticity)."""

    value: Callable[[np.ndarray], np.ndarray]


@dataclass
class ModelSpec:
    model: str
    regularization_delta: float = 0.0
    evolve_gradients: bool = True

    def __post_init__(self):
        self.model = normalize_model_tag(self.model)
        if self.model in _GRADIENT_COUPLED and not self.evolve_gradients:
            # these models cannot advance without G (or W)
            self.evolve_gradients = True
        if self.regularization_delta < 0:
            raise ConfigError("regularization_delta must be >= 0")


@dataclass
class ParticleState:
    """Snapshot of the discretized Lagrangian map."""

    dim: int
    labels: np.ndarray  # (N, d)
    positions: np.ndarray  # (N, d)
    weights: np.ndarray  # (N,)
    grads: Optional[np.ndarray] = None  # (N, d, d)
    theta0: Optional[np.ndarray] = None  # (N,)
    grad_theta0: Optional[np.ndarray] = None  # (N, d)
    omega0: Optional[np.ndarray] = None  # (N,) in 2D, (N, 3) in 3D
    boussinesq_w: Optional[np.ndarray] = None  # (N,)
    t: float = 0.0

    @property
    def n(self) -> int:
        return len(self.labels)

    def replace(self, **kw) -> "ParticleState":
        return dataclasses.replace(self, **kw)


def identity_grads(n: int, dim: int) -> np.ndarray:
    return np.broadcast_to(np.eye(dim), (n, dim, dim)).copy()


def init_grid(
    extent,
    n_per_axis: int,
    theta0: Optional[ScalarField] = None,
    gamma_data: Optional[VectorField | ScalarField] = None,
) -> ParticleState:
    """Uniform cell-centered label grid with midpoint quadrature weights."""
    extent = [tuple(map(float, ax)) for ax in extent]
    dim = len(extent)
    if dim not in (2, 3):
        raise ConfigError("dimension must be 2 or 3")
    if n_per_axis < 2:
        raise ConfigError("need at least 2 points per axis")
    axes, spacings = [], []
    for lo, hi in extent:
        if not hi > lo:
            raise ConfigError(f"degenerate extent ({lo}, {hi})")
        h = (hi - lo) / n_per_axis
        axes.append(lo + h * (np.arange(n_per_axis) + 0.5))
        spacings.append(h)
    mesh = np.meshgrid(*axes, indexing="ij")
    labels = np.stack([m.reshape(-1) for m in mesh], axis=-1)
    weights = np.full(len(labels), float(np.prod(spacings)))

    theta_vals = grad_theta = None
    if theta0 is not None:
        theta_vals = np.asarray(theta0.value(labels), dtype=float)
        if theta0.gradient is not None:
            grad_theta = np.asarray(theta0.gradient(labels), dtype=float)
        else:
            grad_theta = _grid_gradient(theta_vals, [n_per_axis] * dim, spacings)
        if not (np.all(np.isfinite(theta_vals)) and np.all(np.isfinite(grad_theta))):
            raise ConfigError("theta0 sampler produced non-finite values")

    omega_vals = None
    if gamma_data is not None:
        omega_vals = np.asarray(gamma_data.value(labels), dtype=float)
        if not np.all(np.isfinite(omega_vals)):
            raise ConfigError("vorticity sampler produced non-finite values")

    return ParticleState(
        dim=dim,
        labels=labels,
        positions=labels.copy(),
        weights=weights,
        grads=identity_grads(len(labels), dim),
        theta0=theta_vals,
        grad_theta0=grad_theta,
        omega0=omega_vals,
        boussinesq_w=np.zeros(len(labels)),
        t=0.0,
    )


def _grid_gradient(values: np.ndarray, shape, spacings) -> np.ndarray:
    field = values.reshape(shape)
    grads = np.gradient(field, *spacings, edge_order=2)
    return np.stack([g.reshape(-1) for g in grads], axis=-1)


def default_delta(extent, n_per_axis: int) -> float:
    """Blob scale: twice the label spacing of the finest axis."""
    h = min((hi - lo) / n_per_axis for lo, hi in extent)
    return 2.0 * h


def poisson_bracket(f_grad, g_grad) -> float | np.ndarray:
    """{f, g} = (d1 f)(d2 g) - (d2 f)(d1 g) from the two gradients."""
    f_grad = np.asarray(f_grad, dtype=float)
    g_grad = np.asarray(g_grad, dtype=float)
    return f_grad[..., 0] * g_grad[..., 1] - f_grad[..., 1] * g_grad[..., 0]


def _brackets_2d(state: ParticleState) -> tuple[np.ndarray, np.ndarray]:
    """({theta0, X_1}, {theta0, X_2}) at every particle from G and grad theta0."""
    if state.grad_theta0 is None or state.grads is None:
        raise ConfigError("model needs grad_theta0 and evolved gradients")
    th = state.grad_theta0
    G = state.grads
    b1 = th[:, 0] * G[:, 0, 1] - th[:, 1] * G[:, 0, 0]
    b2 = th[:, 0] * G[:, 1, 1] - th[:, 1] * G[:, 1, 0]
    return b1, b2


def _vorticity_density(spec: ModelSpec, state: ParticleState) -> np.ndarray:
    """Scalar Lagrangian vorticity carried by each particle (2D kernels)."""
    if spec.model == "euler2d":
        dens = state.omega0
    elif spec.model == "boussinesq2d":
        dens = state.omega0 + state.boussinesq_w
    elif spec.model == "ipm":
        dens = -_brackets_2d(state)[1]
    else:
        raise AssertionError(spec.model)
    if dens is None:
        raise ConfigError(f"state lacks vorticity data for {spec.model}")
    return dens


def _chunk_ranges(n: int, max_pair_block: int = 2_000_000):
    rows = max(1, min(n, max_pair_block // max(n, 1)))
    return [(s, min(s + rows, n)) for s in range(0, n, rows)]


def _run_chunks(fn, n, threads):
    chunks = _chunk_ranges(n)
    if threads <= 1 or len(chunks) == 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, chunks))


def _reg_factor(r2: np.ndarray, delta: float) -> np.ndarray | float:
    if delta == 0.0:
        return 1.0
    return -np.expm1(-r2 / (delta * delta))


def _check_separation(r2: np.ndarray) -> None:
    # diagonal entries were already lifted; any other zero is a collision
    if np.any(r2 == 0.0):
        raise NumericalFailureError("coincident particles in pairwise sum")


def evaluate_rhs(
    spec: ModelSpec, state: ParticleState, threads: int = 1, need_grad: bool = True
):
    """Velocity, velocity gradient (if requested), and the W rate.

    Returns (u, grad_u, w_dot); grad_u is the Eulerian gradient along the
    path, i.e. the matrix that left-multiplies G in dG/dt = (grad u) G.
    """
    model = spec.model
    X = state.positions
    w = state.weights
    n = state.n
    delta = spec.regularization_delta
    need_grad = need_grad and spec.evolve_gradients

    if model == "euler3d":
        u, grad_u = _rhs_euler3d(spec, state, threads, need_grad)
        w_dot = None
    else:
        if model == "sqg":
            dens = state.theta0
            if dens is None:
                raise ConfigError("sqg needs theta0 data")
        else:
            dens = _vorticity_density(spec, state)
        wd = w * dens

        if need_grad and model == "sqg":
            b1, b2 = _brackets_2d(state)
            vfield = np.stack([b2, -b1], axis=-1)  # grad theta along the path
        else:
            vfield = None

        def chunk_fn(rng):
            i0, i1 = rng
            Y = X[i0:i1, None, :] - X[None, :, :]
            r2 = np.einsum("ijk,ijk->ij", Y, Y)
            rows = np.arange(i0, i1)
            r2[rows - i0, rows] = 1.0  # mask self term
            _check_separation(r2)
            f = _reg_factor(r2, delta)
            if model == "sqg":
                radial = f / (TWO_PI * r2 * np.sqrt(r2))
            else:
                radial = f / (TWO_PI * r2)
            kvec = np.empty_like(Y)
            kvec[..., 0] = -Y[..., 1] * radial
            kvec[..., 1] = Y[..., 0] * radial
            kvec[rows - i0, rows] = 0.0
            u_chunk = np.einsum("j,ijk->ik", wd, kvec)
            g_chunk = None
            if need_grad:
                if model == "sqg":
                    wv = w[:, None] * vfield
                    g_chunk = np.einsum("ijk,jl->ikl", kvec, wv)
                else:
                    # traceless symmetric strain kernel over r^4, regularized
                    s = f / (TWO_PI * r2 * r2)
                    e11 = 2.0 * Y[..., 0] * Y[..., 1] * s
                    e12 = (Y[..., 1] ** 2 - Y[..., 0] ** 2) * s
                    kmat = np.empty(Y.shape[:2] + (2, 2))
                    kmat[..., 0, 0] = e11
                    kmat[..., 0, 1] = e12
                    kmat[..., 1, 0] = e12
                    kmat[..., 1, 1] = -e11
                    kmat[rows - i0, rows] = 0.0
                    g_chunk = np.einsum("j,ijkl->ikl", wd, kmat)
            return u_chunk, g_chunk

        parts = _run_chunks(chunk_fn, n, threads)
        u = np.concatenate([p[0] for p in parts], axis=0)
        grad_u = None
        if need_grad:
            grad_u = np.concatenate([p[1] for p in parts], axis=0)
            if model != "sqg":
                # local vorticity rotation, half the carried vorticity value
                grad_u = grad_u + 0.5 * dens[:, None, None] * ROT90

        w_dot = None
        if model == "boussinesq2d":
            w_dot = _brackets_2d(state)[1]

    if not np.all(np.isfinite(u)) or (
        grad_u is not None and not np.all(np.isfinite(grad_u))
    ):
        raise NumericalFailureError("non-finite right-hand side")
    return u, grad_u, w_dot


def _rhs_euler3d(spec, state, threads, need_grad):
    if state.grads is None or state.omega0 is None:
        raise ConfigError("euler3d needs evolved gradients and vector omega0")
    X = state.positions
    w = state.weights
    delta = spec.regularization_delta
    if delta == 0.0:
        raise ConfigError("euler3d requires a positive regularization delta")
    wvec = np.einsum("nij,nj->ni", state.grads, state.omega0)  # Cauchy vorticity
    ww = w[:, None] * wvec

    def chunk_fn(rng):
        i0, i1 = rng
        Y = X[i0:i1, None, :] - X[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", Y, Y)
        rows = np.arange(i0, i1)
        r2[rows - i0, rows] = 1.0
        _check_separation(r2)
        f = _reg_factor(r2, delta)
        inv_r3 = f / (4.0 * math.pi * r2 * np.sqrt(r2))
        cross = np.cross(np.broadcast_to(ww[None, :, :], Y.shape), Y)
        cross[rows - i0, rows] = 0.0
        u_chunk = np.einsum("ijk,ij->ik", cross, inv_r3)
        g_chunk = None
        if need_grad:
            s = 3.0 * f / (8.0 * math.pi * r2 * r2 * np.sqrt(r2))
            zxw = -cross  # (Y x omega_j), weights already folded in
            # contract the pair axis with the radial factor in one pass, so
            # the (rows, sources, 3, 3) outer product is never materialized
            g_chunk = np.einsum("ij,ijk,ijl->ikl", s, zxw, Y) + np.einsum(
                "ij,ijk,ijl->ikl", s, Y, zxw
            )
        return u_chunk, g_chunk

    parts = _run_chunks(chunk_fn, state.n, threads)
    u = np.concatenate([p[0] for p in parts], axis=0)
    grad_u = None
    if need_grad:
        grad_u = np.concatenate([p[1] for p in parts], axis=0)
        grad_u = grad_u + 0.5 * _cross_matrix(wvec)
    return u, grad_u


def _cross_matrix(v: np.ndarray) -> np.ndarray:
    """Batched matrix [v]_x with [v]_x b = v x b."""
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def velocity(spec: ModelSpec, state: ParticleState, threads: int = 1) -> np.ndarray:
    u, _, _ = evaluate_rhs(spec, state, threads=threads, need_grad=False)
    return u


def velocity_gradient(
    spec: ModelSpec, state: ParticleState, threads: int = 1
) -> np.ndarray:
    _, grad_u, _ = evaluate_rhs(spec, state, threads=threads)
    if grad_u is None:
        raise ConfigError("velocity gradient requires evolve_gradients")
    return grad_u


def grad_rhs(spec: ModelSpec, state: ParticleState, threads: int = 1) -> np.ndarray:
    """dG/dt = (grad u) G at every particle."""
    grad_u = velocity_gradient(spec, state, threads=threads)
    return np.einsum("nij,njk->nik", grad_u, state.grads)


def rk4_step(
    spec: ModelSpec, state: ParticleState, dt: float, threads: int = 1
) -> ParticleState:
    """Classical four-stage step for the coupled (X, G, W) system."""
    if dt <= 0:
        raise ConfigError("dt must be positive")

    def rhs(s: ParticleState):
        u, grad_u, w_dot = evaluate_rhs(spec, s, threads=threads)
        g_dot = None
        if grad_u is not None:
            g_dot = np.einsum("nij,njk->nik", grad_u, s.grads)
        return u, g_dot, w_dot

    def advanced(base: ParticleState, rates, factor: float) -> ParticleState:
        u, g_dot, w_dot = rates
        kw = {"positions": base.positions + factor * u, "t": base.t + factor}
        if g_dot is not None:
            kw["grads"] = base.grads + factor * g_dot
        if w_dot is not None:
            kw["boussinesq_w"] = base.boussinesq_w + factor * w_dot
        return base.replace(**kw)

    k1 = rhs(state)
    k2 = rhs(advanced(state, k1, dt / 2.0))
    k3 = rhs(advanced(state, k2, dt / 2.0))
    k4 = rhs(advanced(state, k3, dt))

    def combine(parts):
        vals = [p for p in parts if p is not None]
        if not vals:
            return None
        a, b, c, d = parts
        return (a + 2.0 * b + 2.0 * c + d) * (dt / 6.0)

    du = combine([k[0] for k in (k1, k2, k3, k4)])
    dg = combine([k[1] for k in (k1, k2, k3, k4)])
    dw = combine([k[2] for k in (k1, k2, k3, k4)])
    kw = {"positions": state.positions + du, "t": state.t + dt}
    if dg is not None:
        kw["grads"] = state.grads + dg
    if dw is not None:
        kw["boussinesq_w"] = state.boussinesq_w + dw
    new = state.replace(**kw)
    if not np.all(np.isfinite(new.positions)):
        raise NumericalFailureError("non-finite positions after RK4 step")
    return new


# -- diagnostics --------------------------------------------------------------


@dataclass
class DiagnosticsRecord:
    t: float
    chord_arc_min: float
    chord_arc_max: float
    lambda_bound: float
    grad_u_sup: float
    det_grad_max_dev: float
    hamiltonian: Optional[float] = None
    momentum: Optional[tuple[float, float]] = None
    angular_impulse: Optional[float] = None


def nearest_neighbor_pairs(labels: np.ndarray) -> np.ndarray:
    """Index pairs (i, nn(i)) under label distance, computed chunkwise."""
    n = len(labels)
    out = np.empty(n, dtype=int)
    for i0, i1 in _chunk_ranges(n):
        d2 = np.sum(
            (labels[i0:i1, None, :] - labels[None, :, :]) ** 2, axis=-1
        )
        rows = np.arange(i0, i1)
        d2[rows - i0, rows] = np.inf
        out[i0:i1] = np.argmin(d2, axis=1)
    return np.stack([np.arange(n), out], axis=-1)


def chord_arc(
    state: ParticleState, sample_pairs: int = 2048, seed: int = 0
) -> tuple[float, float]:
    """Extremes of |a_i - a_j| / |X_i - X_j| over sampled and neighbor pairs."""
    n = state.n
    if n < 2:
        raise ConfigError("chord-arc needs at least 2 particles")
    pairs = [nearest_neighbor_pairs(state.labels)]
    if sample_pairs > 0:
        rng = np.random.default_rng(seed)
        i = rng.integers(0, n, size=sample_pairs)
        j = rng.integers(0, n, size=sample_pairs)
        keep = i != j
        pairs.append(np.stack([i[keep], j[keep]], axis=-1))
    pairs = np.concatenate(pairs, axis=0)
    da = np.linalg.norm(state.labels[pairs[:, 0]] - state.labels[pairs[:, 1]], axis=-1)
    dx = np.linalg.norm(
        state.positions[pairs[:, 0]] - state.positions[pairs[:, 1]], axis=-1
    )
    if np.any(dx == 0.0):
        return (float(np.min(da[dx > 0] / dx[dx > 0])) if np.any(dx > 0) else np.inf,
                np.inf)
    ratios = da / dx
    return float(np.min(ratios)), float(np.max(ratios))


def operator_norms(mats: np.ndarray) -> np.ndarray:
    """Spectral norms of a batch of 2x2 or 3x3 matrices."""
    d = mats.shape[-1]
    if d == 2:
        fro2 = np.sum(mats * mats, axis=(-2, -1))
        det = mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]
        gap = np.sqrt(np.maximum(fro2 * fro2 - 4.0 * det * det, 0.0))
        return np.sqrt((fro2 + gap) / 2.0)
    return np.linalg.svd(mats, compute_uv=False)[..., 0]


def grad_u_sup(spec: ModelSpec, state: ParticleState, threads: int = 1) -> float:
    """Discrete sup norm of grad u, via (dG/dt) G^{-1} along the paths."""
    dg = grad_rhs(spec, state, threads=threads)
    ginv = np.linalg.inv(state.grads)
    if not np.all(np.isfinite(ginv)):
        raise NumericalFailureError("singular label gradient")
    return float(np.max(operator_norms(np.einsum("nij,njk->nik", dg, ginv))))


def lambda_accumulate(grad_u_history, dt: float) -> float:
    """exp of the trapezoid-rule integral of the grad-u sup history."""
    hist = np.asarray(grad_u_history, dtype=float)
    if np.any(hist < 0):
        raise ValueError("grad_u history must be nonnegative")
    if len(hist) < 2:
        return 1.0
    return float(np.exp(np.trapezoid(hist, dx=dt)))


def invariants_euler2d(state: ParticleState) -> tuple[float, np.ndarray, float]:
    """Point-vortex Hamiltonian, linear momentum, and angular impulse."""
    if state.omega0 is None:
        raise ConfigError("point-vortex invariants need omega0 circulations")
    gamma = state.weights * state.omega0
    X = state.positions
    diff = X[:, None, :] - X[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    iu = np.triu_indices(state.n, k=1)
    h = -np.sum(gamma[iu[0]] * gamma[iu[1]] * np.log(dist[iu])) / (2.0 * TWO_PI)
    p = gamma @ X
    ang = float(np.sum(gamma * np.sum(X * X, axis=-1)))
    return float(h), p, ang


def incompressibility_residual(state: ParticleState) -> float:
    """max_i |det G_i - 1|."""
    if state.grads is None:
        raise ConfigError("no gradients evolved")
    return float(np.max(np.abs(np.linalg.det(state.grads) - 1.0)))


def make_point_vortex_state(positions, circulations) -> ParticleState:
    """Point-vortex configuration: unit weights, circulations as omega0."""
    positions = np.asarray(positions, dtype=float)
    circs = np.asarray(circulations, dtype=float)
    n = len(positions)
    return ParticleState(
        dim=2,
        labels=positions.copy(),
        positions=positions.copy(),
        weights=np.ones(n),
        grads=identity_grads(n, 2),
        omega0=circs,
        boussinesq_w=np.zeros(n),
        t=0.0,
    )
