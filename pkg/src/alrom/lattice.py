"""Conservative and linearly damped Ablowitz-Ladik lattices on a periodic grid.

State variables are the real and imaginary parts (p, q) of the complex
lattice wave function w = p + iq.  The conservative lattice is the
skew-gradient system

    dz/dt = S(z) grad H(z),    S(z) = [[0, -M], [M, 0]],

with the quadratic Hamiltonian H = (1/h^2) sum_n (p_n p_{n-1} + q_n q_{n-1})
and M = diag(1 + gamma h^2 (p_n^2 + q_n^2)).  Linear damping adds -mu*z.
All index arithmetic wraps periodically.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class LatticeConfig:
    """Physical and discrete parameters of the lattice.

    The mesh width is h = 2L/N.  ``mu == 0`` selects the conservative
    system; ``mu > 0`` the linearly damped one.
    """

    n_sites: int
    half_length: float
    gamma: float
    dt: float
    t_final: float
    mu: float = 0.0
    mesh: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.n_sites <= 0:
            raise ValueError("n_sites must be positive")
        if self.dt <= 0 or self.t_final <= 0:
            raise ValueError("dt and t_final must be positive")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        h = 2.0 * self.half_length / self.n_sites
        if self.mesh is None:
            object.__setattr__(self, "mesh", h)
        elif abs(self.mesh * self.n_sites - 2.0 * self.half_length) > 1e-12 * abs(
            2.0 * self.half_length
        ):
            raise ValueError("mesh inconsistent with h = 2L/N")

    @property
    def conservative(self) -> bool:
        return self.mu == 0.0

    @property
    def n_steps(self) -> int:
        """Number of time steps K; t_final/dt must be integral to 1e-9."""
        k = round(self.t_final / self.dt)
        if abs(k - self.t_final / self.dt) > 1e-9:
            raise ValueError("t_final must be an integer multiple of dt")
        return k

    def grid(self) -> np.ndarray:
        """Site coordinates x_n = -L + (n-1)h, n = 1..N."""
        return -self.half_length + self.mesh * np.arange(self.n_sites)


@dataclass
class State:
    """Lattice state (p, q) at time t."""

    p: np.ndarray
    q: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        if self.p.shape != self.q.shape or self.p.ndim != 1:
            raise ValueError("p and q must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(self.p)) and np.all(np.isfinite(self.q))):
            raise ValueError("state entries must be finite")

    @property
    def n(self) -> int:
        return self.p.size

    def modulus(self) -> np.ndarray:
        """|w_n| = sqrt(p_n^2 + q_n^2)."""
        return np.hypot(self.p, self.q)


@dataclass
class Tangent:
    """Time derivative (dp, dq) of a lattice state."""

    dp: np.ndarray
    dq: np.ndarray


def initial_soliton_conservative(config: LatticeConfig, eta: float, xi: float) -> State:
    """Single-soliton initial data 2*eta*exp(2i*xi*x)*sech(2*eta*x) on the grid."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    x = config.grid()
    envelope = 2.0 * eta / np.cosh(2.0 * eta * x)
    return State(p=envelope * np.cos(2.0 * xi * x), q=envelope * np.sin(2.0 * xi * x))


def initial_soliton_damped(config: LatticeConfig, phase: float) -> State:
    """Damped-run initial data (sqrt2/2)*exp(i(x+phase)/2)*sech((x+phase)/2)."""
    x = config.grid()
    arg = 0.5 * (x + phase)
    envelope = (np.sqrt(2.0) / 2.0) / np.cosh(arg)
    return State(p=envelope * np.cos(arg), q=envelope * np.sin(arg))


def hamiltonian(state: State, config: LatticeConfig) -> float:
    """Quadratic energy H = (1/h^2) sum_n (p_n p_{n-1} + q_n q_{n-1}), periodic."""
    p, q = state.p, state.q
    return float(
        (p @ np.roll(p, 1) + q @ np.roll(q, 1)) / config.mesh**2
    )


def momentum(state: State, config: LatticeConfig) -> float:
    """Quadratic momentum invariant with centered differences, periodic."""
    p, q = state.p, state.q
    dp = np.roll(p, -1) - np.roll(p, 1)
    dq = np.roll(q, -1) - np.roll(q, 1)
    return float((q @ dp - p @ dq) / (2.0 * config.mesh))


def neighbor_sum(v: np.ndarray) -> np.ndarray:
    """(v_{n+1} + v_{n-1}) with periodic wrap."""
    return np.roll(v, -1) + np.roll(v, 1)


def neighbor_sum_matrix(n: int, h: float) -> sp.csr_matrix:
    """The gradient matrix D with (Dv)_n = (v_{n+1} + v_{n-1})/h^2, periodic corners."""
    ones = np.ones(n - 1)
    d = sp.diags([ones, ones], [1, -1], shape=(n, n), format="lil")
    d[0, n - 1] = 1.0
    d[n - 1, 0] = 1.0
    return (d / h**2).tocsr()


def grad_hamiltonian(state: State, config: LatticeConfig) -> Tangent:
    """grad_p H = D p, grad_q H = D q."""
    h2 = config.mesh**2
    return Tangent(dp=neighbor_sum(state.p) / h2, dq=neighbor_sum(state.q) / h2)


def nonlinear_diag(state: State, config: LatticeConfig) -> np.ndarray:
    """Diagonal of the Poisson matrix block, m_n = 1 + gamma h^2 (p_n^2 + q_n^2)."""
    return 1.0 + config.gamma * config.mesh**2 * (state.p**2 + state.q**2)


def fom_rhs(state: State, config: LatticeConfig) -> Tangent:
    """Full-order right-hand side, including the -mu*z damping when mu > 0."""
    m = nonlinear_diag(state, config)
    h2 = config.mesh**2
    dp = -m * neighbor_sum(state.q) / h2
    dq = m * neighbor_sum(state.p) / h2
    if config.mu != 0.0:
        dp -= config.mu * state.p
        dq -= config.mu * state.q
    return Tangent(dp=dp, dq=dq)


def fom_rhs_jacobian(state: State, config: LatticeConfig) -> sp.csr_matrix:
    """Exact Jacobian of fom_rhs as a sparse 2N x 2N matrix (z = [p; q] order).

    The right-hand side is cubic in z, so the Jacobian is exact: banded
    blocks from D plus diagonal blocks from the nonlinearity.
    """
    n = state.n
    h2 = config.mesh**2
    g2 = 2.0 * config.gamma * h2
    m = nonlinear_diag(state, config)
    dq_sum = neighbor_sum(state.q) / h2
    dp_sum = neighbor_sum(state.p) / h2
    d = neighbor_sum_matrix(n, config.mesh)

    md = sp.diags(m) @ d
    j_pp = sp.diags(-g2 * state.p * dq_sum - config.mu)
    j_pq = -md + sp.diags(-g2 * state.q * dq_sum)
    j_qp = md + sp.diags(g2 * state.p * dp_sum)
    j_qq = sp.diags(g2 * state.q * dp_sum - config.mu)
    return sp.bmat([[j_pp, j_pq], [j_qp, j_qq]], format="csr")


# --- flat-vector packing and the system wrapper used by the integrators ---

def pack(state: State) -> np.ndarray:
    return np.concatenate([state.p, state.q])


def unpack(z: np.ndarray, t: float = 0.0) -> State:
    n = z.size // 2
    return State(p=z[:n].copy(), q=z[n:].copy(), t=t)


class FullOrderSystem:
    """Skew-gradient system interface for the lattice, on flat vectors z = [p; q].

    ``include_damping=False`` exposes the conservative field only; the
    exponential midpoint stepper handles -mu*z exactly by rescaling and
    must be fed the conservative field.

    The Jacobian sparsity pattern is cached: per call only the 8N entry
    values are recomputed, matching fom_rhs_jacobian entry for entry.
    """

    def __init__(self, config: LatticeConfig, include_damping: bool = True):
        self.config = config
        self.include_damping = include_damping
        n = config.n_sites
        idx = np.arange(n)
        up = (idx + 1) % n
        down = (idx - 1) % n
        # stencil entries of -MD (p-rows) and +MD (q-rows), then the four
        # diagonals j_pp, j_pq, j_qp, j_qq
        self._rows = np.concatenate(
            [idx, idx, n + idx, n + idx, idx, idx, n + idx, n + idx]
        )
        self._cols = np.concatenate(
            [n + up, n + down, up, down, idx, n + idx, idx, n + idx]
        )

    @property
    def dim(self) -> int:
        return 2 * self.config.n_sites

    def _mu(self) -> float:
        return self.config.mu if self.include_damping else 0.0

    def rhs(self, z: np.ndarray, t: float = 0.0) -> np.ndarray:
        n = self.config.n_sites
        p, q = z[:n], z[n:]
        cfgm = self.config
        m = 1.0 + cfgm.gamma * cfgm.mesh**2 * (p * p + q * q)
        h2 = cfgm.mesh**2
        dp = -m * neighbor_sum(q) / h2
        dq = m * neighbor_sum(p) / h2
        mu = self._mu()
        if mu != 0.0:
            dp -= mu * p
            dq -= mu * q
        return np.concatenate([dp, dq])

    def jacobian(self, z: np.ndarray, t: float = 0.0) -> sp.csc_matrix:
        n = self.config.n_sites
        cfgm = self.config
        p, q = z[:n], z[n:]
        h2 = cfgm.mesh**2
        g2 = 2.0 * cfgm.gamma * h2
        mu = self._mu()
        m = 1.0 + cfgm.gamma * h2 * (p * p + q * q)
        dq_sum = neighbor_sum(q) / h2
        dp_sum = neighbor_sum(p) / h2
        stencil = m / h2
        data = np.concatenate([
            -stencil, -stencil, stencil, stencil,
            -g2 * p * dq_sum - mu,
            -g2 * q * dq_sum,
            g2 * p * dp_sum,
            g2 * q * dp_sum - mu,
        ])
        return sp.csc_matrix((data, (self._rows, self._cols)),
                             shape=(2 * n, 2 * n))

    def hamiltonian(self, z: np.ndarray) -> float:
        return hamiltonian(unpack(z), self.config)

    def momentum(self, z: np.ndarray) -> float:
        return momentum(unpack(z), self.config)
