"""Energy-exact finite-difference discretization.

All six fields are collocated on the nodes of a uniform grid.  The energy
integral is evaluated by the composite trapezoid rule: on each cell the
integrand is averaged over the cell's two endpoints, with every derivative
replaced by the cell's difference quotient,

    int f(w_x, w) ~ sum_cells (h/2) * [ f(Dw, w_left) + f(Dw, w_right) ],

which reduces to trapezoid node weights for the velocity terms.  Writing the
resulting quadratic form as E = 1/2 U^T M U with a stiffness block S^T W S,
the generator uses the transpose of the very same strain map S, so

    M A + A^T M = -2 * diag(0, C, 0)   on the shear-velocity block

holds to rounding, with C the damping quadrature.  In the interior this
reproduces the standard centered second-order stencils of the coupled
equations (compact second differences, long-centered first differences,
pointwise zeroth-order couplings); at a zero-slope end it reproduces the
ghost-node reflection.  Keeping the zeroth-order couplings pointwise matters:
averaging them onto midpoints annihilates the alternating band-edge mode of
the longitudinal field and leaves it exactly undamped under DNN conditions.

Clamped fields keep interior nodes only.  Zero-slope (DNN) fields retain all
nodes but are restricted to the mean-zero subspace of the trapezoid inner
product through an orthonormal basis, which removes the rigid constant mode
that otherwise makes the energy degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    BeamParameters,
    BoundaryCondition,
    DampingProfile,
    check_dnn_admissible,
    damping_values,
)

FIELD_NAMES = ("phi", "psi", "omega", "u", "v", "z")


class AdmissibilityError(ValueError):
    """Raised when the requested geometry makes the energy norm degenerate."""


@dataclass(frozen=True)
class Grid:
    """Uniform grid with n cells on [0, length]."""

    n: int
    length: float
    h: float = field(init=False)

    def __post_init__(self):
        if self.n < 4:
            raise ValueError(f"need at least 4 cells, got {self.n}")
        if not self.length > 0:
            raise ValueError("length must be positive")
        object.__setattr__(self, "h", self.length / self.n)

    def nodes(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.h

    def trapezoid_weights(self) -> np.ndarray:
        mu = np.full(self.n + 1, self.h)
        mu[0] = mu[-1] = 0.5 * self.h
        return mu


def difference_operator(grid: Grid) -> np.ndarray:
    """Forward difference mapping node values to cell-midpoint derivatives."""
    n, h = grid.n, grid.h
    D = np.zeros((n, n + 1))
    idx = np.arange(n)
    D[idx, idx] = -1.0 / h
    D[idx, idx + 1] = 1.0 / h
    return D


def endpoint_selectors(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Left and right endpoint values of each cell (node-to-cell selectors)."""
    n = grid.n
    eye = np.eye(n + 1)
    return eye[:n, :], eye[1:, :]


def dirichlet_embedding(n: int) -> np.ndarray:
    """Embed interior node values into the full node vector (zero ends)."""
    E = np.zeros((n + 1, n - 1))
    E[1:n, :] = np.eye(n - 1)
    return E


def mean_zero_basis(grid: Grid) -> np.ndarray:
    """Orthonormal basis of the mean-zero subspace in the trapezoid product.

    Columns B satisfy B^T diag(mu) B = I and mu^T B = 0, built from the
    Householder reflector that sends sqrt(mu)/|sqrt(mu)| to the first
    coordinate axis.  Used for the zero-slope fields, whose constant mode
    carries no strain energy and is invisible to the damping term.
    """
    mu = grid.trapezoid_weights()
    root = np.sqrt(mu)
    q = root / np.linalg.norm(root)
    u = q.copy()
    u[0] -= 1.0
    u /= np.linalg.norm(u)
    H = np.eye(grid.n + 1) - 2.0 * np.outer(u, u)
    # columns 1..n of the reflector are orthonormal and orthogonal to q
    return H[:, 1:] / root[:, None]


def mean_zero_projector(grid: Grid) -> np.ndarray:
    """mu-orthogonal projector onto the mean-zero subspace (for diagnostics)."""
    B = mean_zero_basis(grid)
    return B @ (B.T * grid.trapezoid_weights()[None, :])


def _field_embeddings(bc: BoundaryCondition, grid: Grid) -> dict[str, np.ndarray]:
    interior = dirichlet_embedding(grid.n)
    if bc is BoundaryCondition.DDD:
        pos = {"phi": interior, "psi": interior, "omega": interior}
    else:
        B = mean_zero_basis(grid)
        pos = {"phi": interior, "psi": B, "omega": B}
    # velocities share the constraint space of their displacement field
    return {**pos, "u": pos["phi"], "v": pos["psi"], "z": pos["omega"]}


def _grams(params: BeamParameters, bc: BoundaryCondition, grid: Grid,
           profile: DampingProfile | None):
    """Stiffness, velocity-weight and damping Gram blocks, shared by the
    energy matrix and the generator so the two stay exactly compatible."""
    n, h = grid.n, grid.h
    emb = _field_embeddings(bc, grid)
    D = difference_operator(grid)
    NL, NR = endpoint_selectors(grid)
    l = params.l

    Dphi = D @ emb["phi"]
    Dpsi = D @ emb["psi"]
    Domega = D @ emb["omega"]
    zpsi = np.zeros((n, emb["psi"].shape[1]))
    zomega = np.zeros((n, emb["omega"].shape[1]))

    # per-cell trapezoid rows: each strain integrand sampled at the two cell
    # endpoints, derivatives as the cell difference quotient
    rows = []
    cell_w = []
    for N in (NL, NR):
        Npsi, Nomega, Nphi = N @ emb["psi"], N @ emb["omega"], N @ emb["phi"]
        rows.append(np.hstack([Dphi, Npsi, l * Nomega]))          # shear
        cell_w.append(np.full(n, 0.5 * params.kappa * h))
        rows.append(np.hstack([-l * Nphi, zpsi, Domega]))         # stretch
        cell_w.append(np.full(n, 0.5 * params.kappa0 * h))
    rows.append(np.hstack([np.zeros((n, emb["phi"].shape[1])), Dpsi, zomega]))
    cell_w.append(np.full(n, params.b * h))                        # bending

    S = np.vstack(rows)
    cell_w = np.concatenate(cell_w)
    K = S.T @ (cell_w[:, None] * S)
    K = 0.5 * (K + K.T)

    mu = grid.trapezoid_weights()
    if bc is BoundaryCondition.DDD:
        w_node = mu[1:-1]
        weights = {"u": w_node, "v": w_node, "z": w_node}
    else:
        # mean-zero basis is orthonormal in the mu product, so the reduced
        # velocity Gram is the identity by construction
        weights = {"u": mu[1:-1], "v": np.ones(n), "z": np.ones(n)}

    if profile is None:
        C = np.zeros((emb["v"].shape[1],) * 2)
        a_nodes = np.zeros(n + 1)
    else:
        a_nodes = damping_values(profile, grid.nodes(), params.L)
        Ev = emb["v"]
        C = Ev.T @ ((mu * a_nodes)[:, None] * Ev)
        C = 0.5 * (C + C.T)

    return emb, K, weights, C, a_nodes


class DiscreteSystem:
    """Assembled first-order system U' = A U with energy E = U^T M U / 2.

    State ordering is (phi, psi, omega, u, v, z) with u, v, z the velocities.
    M is symmetric positive definite on the reduced coordinates; the damping
    enters A only on the shear-velocity block.
    """

    def __init__(self, params, profile, bc, grid, A, M, slices, embeddings,
                 velocity_weights, damping_gram, damping_nodes):
        self.params = params
        self.profile = profile
        self.bc = bc
        self.grid = grid
        self.A = A
        self.M = M
        self.slices = slices
        self.embeddings = embeddings
        self.velocity_weights = velocity_weights
        self.damping_gram = damping_gram
        self.damping_nodes = damping_nodes
        self._cache: dict = {}

    @property
    def dimension(self) -> int:
        return self.A.shape[0]

    def energy(self, U: np.ndarray) -> float:
        return 0.5 * float(U @ (self.M @ U))

    def dissipation_rate(self, U: np.ndarray) -> float:
        """-dE/dt along the flow: quadrature of a(x) times shear velocity squared."""
        v = U[self.slices["v"]]
        return float(v @ (self.damping_gram @ v))

    def field_values(self, U: np.ndarray, name: str) -> np.ndarray:
        """Node values of one field, boundary values included."""
        if name not in FIELD_NAMES:
            raise KeyError(f"unknown field {name!r}")
        return self.embeddings[name] @ U[self.slices[name]]

    def undamped_generator(self) -> np.ndarray:
        """Generator with the damping term removed; same stencils otherwise."""
        if "A0" not in self._cache:
            A0 = self.A.copy()
            sl = self.slices["v"]
            rho_w = self.params.rho2 * self.velocity_weights["v"]
            A0[sl, sl] += self.damping_gram / rho_w[:, None]
            self._cache["A0"] = A0
        return self._cache["A0"]


def _assemble_parts(params, bc, grid, profile):
    emb, K, weights, C, a_nodes = _grams(params, bc, grid, profile)
    sizes = [emb[f].shape[1] for f in FIELD_NAMES]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    slices = {f: slice(int(offsets[i]), int(offsets[i + 1]))
              for i, f in enumerate(FIELD_NAMES)}
    d = int(offsets[-1])
    npos = slices["omega"].stop

    rho_w = np.concatenate([
        params.rho1 * weights["u"],
        params.rho2 * weights["v"],
        params.rho1 * weights["z"],
    ])

    M = np.zeros((d, d))
    M[:npos, :npos] = K
    vel = np.arange(npos, d)
    M[vel, vel] = rho_w

    A = np.zeros((d, d))
    A[:npos, npos:] = np.eye(npos)
    A[npos:, :npos] = -K / rho_w[:, None]
    sl_v = slices["v"]
    A[sl_v, sl_v] -= C / (params.rho2 * weights["v"])[:, None]

    return emb, K, weights, C, a_nodes, slices, A, M


def assemble(params: BeamParameters, profile: DampingProfile,
             bc: BoundaryCondition, n: int) -> DiscreteSystem:
    """Build the discrete damped system on n cells.

    Refuses DNN geometries with L within tolerance of a multiple of pi/l,
    where the continuous problem itself loses coercivity.
    """
    profile.validate_for_length(params.L)
    if bc is BoundaryCondition.DNN:
        adm = check_dnn_admissible(params)
        if not adm.ok:
            raise AdmissibilityError(
                f"length L={params.L} is within {adm.tol:g} of {adm.nearest_n}*pi/l; "
                "the zero-slope problem is degenerate there, perturb L or l")
    grid = Grid(n=n, length=params.L)
    emb, K, weights, C, a_nodes, slices, A, M = _assemble_parts(params, bc, grid, profile)
    return DiscreteSystem(params, profile, bc, grid, A, M, slices, emb,
                          weights, C, a_nodes)


def assemble_energy_gram(params: BeamParameters, bc: BoundaryCondition,
                         grid: Grid) -> np.ndarray:
    """Energy Gram matrix alone (no damping dependence)."""
    *_, M = _assemble_parts(params, bc, grid, None)
    return M
