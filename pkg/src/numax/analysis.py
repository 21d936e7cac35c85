"""Analysis tools for the controlled multiplier dynamics.

Two families live here. The first interprets a single nuPI update relative
to gradient ascent through the ratio

    ratio = (nuPI increment) / (GA increment) = 1/(1 - psi) * [1 - psi xi_{t-1} / e_t],
    psi   = kp (1 - nu) / (ki + kp (1 - nu)),

and classifies it into three qualitative modes (faster than GA, slower than
GA, opposite direction). The second studies the continuous-time gradient
descent / PI ascent flow on an equality-constrained QP

    min 1/2 x'Hx + c'x   s.t.   Ax - b = 0,

whose velocity dynamics are governed by the block matrix U; the spectrum of
-U determines whether the flow diverges, oscillates, or is critically or
overdamped, and the proportional gain kp moves the system between these
regimes.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import ConfigurationError, NumericalError


@dataclass(frozen=True)
class RatioInputs:
    kp: float
    ki: float
    nu: float
    xi_prev: float
    e_t: float


def update_mix(inputs: RatioInputs) -> float:
    """psi = kp(1-nu) / (ki + kp(1-nu)); the proportional share of the update."""
    prop = inputs.kp * (1.0 - inputs.nu)
    denom = inputs.ki + prop
    if denom == 0.0:
        raise ConfigurationError("ki + kp(1-nu) = 0; psi is undefined")
    return prop / denom


def relative_update_ratio(inputs: RatioInputs) -> float:
    """One-step nuPI increment divided by the GA(alpha=ki) increment."""
    psi = update_mix(inputs)
    if psi == 1.0:
        raise ConfigurationError("psi = 1 (ki = 0); ratio is undefined")
    if inputs.e_t == 0.0:
        raise NumericalError("GA step is zero; ratio undefined")
    return 1.0 / (1.0 - psi) * (1.0 - psi * inputs.xi_prev / inputs.e_t)


class Mode(Enum):
    """Qualitative behavior of one nuPI update versus gradient ascent, for
    xi_{t-1} > 0 and psi in (0, 1): A moves faster than GA, B slower, C in
    the opposite direction ("optimistic" decrease while still infeasible)."""

    A = "A"
    B = "B"
    C = "C"


def classify_mode(inputs: RatioInputs) -> Mode:
    """Boundary convention: e = xi_{t-1} belongs to B, e = psi xi_{t-1}
    (ratio exactly zero) and e = 0 belong to C."""
    if not inputs.xi_prev > 0.0:
        raise ConfigurationError(f"classify_mode requires xi_prev > 0, got {inputs.xi_prev}")
    psi = update_mix(inputs)
    if not 0.0 < psi < 1.0:
        raise ConfigurationError(f"classify_mode requires psi in (0, 1), got {psi}")
    e = inputs.e_t
    if e < 0.0 or e > inputs.xi_prev:
        return Mode.A
    if e > psi * inputs.xi_prev:
        return Mode.B
    return Mode.C


@dataclass(frozen=True)
class QPSystem:
    """Equality-constrained QP with PI gains attached: H (n x n, symmetric
    PSD), A (c x n), b (c,), c_lin (n,)."""

    H: np.ndarray
    A: np.ndarray
    b: np.ndarray
    c_lin: np.ndarray
    kp: float
    ki: float

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=np.float64))
        A = np.atleast_2d(np.asarray(self.A, dtype=np.float64))
        b = np.atleast_1d(np.asarray(self.b, dtype=np.float64))
        c_lin = np.atleast_1d(np.asarray(self.c_lin, dtype=np.float64))
        n = H.shape[0]
        if H.shape != (n, n):
            raise ConfigurationError(f"H must be square, got {H.shape}")
        if np.max(np.abs(H - H.T), initial=0.0) > 1e-12:
            raise ConfigurationError("H must be symmetric to 1e-12")
        if A.shape[1] != n:
            raise ConfigurationError(f"A has {A.shape[1]} columns, expected {n}")
        if b.shape != (A.shape[0],):
            raise ConfigurationError(f"b must have length {A.shape[0]}, got {b.size}")
        if c_lin.shape != (n,):
            raise ConfigurationError(f"c_lin must have length {n}, got {c_lin.size}")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c_lin", c_lin)

    @property
    def dim_primal(self) -> int:
        return self.H.shape[0]

    @property
    def num_constraints(self) -> int:
        return self.A.shape[0]


def qp_system_matrix(sys: QPSystem) -> np.ndarray:
    """U = [[H, A'], [A (kp H - ki I), kp A A']]; the velocity state
    [xdot, mudot] of the flow obeys d/dt [xdot, mudot] = -U [xdot, mudot]."""
    H, A = sys.H, sys.A
    n = sys.dim_primal
    top = np.hstack([H, A.T])
    bottom = np.hstack([A @ (sys.kp * H - sys.ki * np.eye(n)), sys.kp * (A @ A.T)])
    return np.vstack([top, bottom])


def eigen_1d(h: float, a: float, kp: float, ki: float) -> tuple:
    """Closed-form spectrum of -U for one primal variable and one constraint:

        lambda = [-(h + kp a^2) +- sqrt((h + kp a^2)^2 - 4 a^2 ki)] / 2
    """
    s = h + kp * a * a
    disc = s * s - 4.0 * a * a * ki
    root = cmath.sqrt(complex(disc, 0.0))
    return ((-s + root) / 2.0, (-s - root) / 2.0)


@dataclass(frozen=True)
class CriticalGains:
    """The two kp values with coincident eigenvalues (zero discriminant);
    `convergent` is the one with h + kp a^2 > 0, or None if neither."""

    kp_plus: float
    kp_minus: float
    convergent: float | None


def critical_kp(h: float, a: float, ki: float) -> CriticalGains:
    """kp* = (-h +- 2|a| sqrt(ki)) / a^2. The eigenvalue at kp* is
    -(h + kp* a^2)/2, so only the larger root can give a convergent system."""
    if a == 0.0:
        raise ConfigurationError("critical_kp requires a != 0")
    if ki < 0.0:
        raise ConfigurationError("critical_kp requires ki >= 0")
    a2 = a * a
    spread = 2.0 * abs(a) * np.sqrt(ki)
    kp_plus = (-h + spread) / a2
    kp_minus = (-h - spread) / a2
    convergent = None
    if h + kp_plus * a2 > 0.0:
        convergent = kp_plus
    elif h + kp_minus * a2 > 0.0:
        convergent = kp_minus
    return CriticalGains(kp_plus=kp_plus, kp_minus=kp_minus, convergent=convergent)


class RegimeKind(Enum):
    DIVERGENT_MONOTONE = "divergent-monotone"
    DIVERGENT_OSCILLATORY = "divergent-oscillatory"
    UNDERDAMPED = "underdamped"
    CRITICALLY_DAMPED = "critically-damped"
    OVERDAMPED = "overdamped"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class DampingRegime:
    kind: RegimeKind
    eigenvalues: tuple


# |Re| below this (relative) threshold counts as a zero real part; pure
# rotation (bilinear GDA) is reported as MARGINAL rather than misclassified.
_ZERO_REAL_TOL = 1e-12
# Relative tolerance under which eigenvalues count as repeated.
_REPEAT_TOL = 1e-9


def classify_regime(eigenvalues) -> DampingRegime:
    """Classify the spectrum of -U (continuous-time convention: negative
    real parts converge)."""
    eigs = tuple(complex(v) for v in np.atleast_1d(np.asarray(eigenvalues, dtype=complex)))
    if not eigs:
        raise ConfigurationError("classify_regime requires at least one eigenvalue")

    def scale(v):
        return max(1.0, abs(v))

    kind = None
    if any(abs(v.real) <= _ZERO_REAL_TOL * scale(v) for v in eigs):
        kind = RegimeKind.MARGINAL
    else:
        all_real = all(abs(v.imag) <= _ZERO_REAL_TOL * scale(v) for v in eigs)
        if any(v.real > 0.0 for v in eigs):
            kind = RegimeKind.DIVERGENT_MONOTONE if all_real else RegimeKind.DIVERGENT_OSCILLATORY
        elif not all_real:
            kind = RegimeKind.UNDERDAMPED
        else:
            repeated = any(
                abs(eigs[i] - eigs[j]) <= _REPEAT_TOL * max(scale(eigs[i]), scale(eigs[j]))
                for i in range(len(eigs)) for j in range(i + 1, len(eigs))
            )
            kind = RegimeKind.CRITICALLY_DAMPED if repeated and len(eigs) > 1 else RegimeKind.OVERDAMPED
    return DampingRegime(kind=kind, eigenvalues=eigs)


def flow_state_matrix(sys: QPSystem) -> np.ndarray:
    """State matrix M of zdot = M z for z = [x, mu, xdot, mudot]:
    M = [[0, I], [0, -U]] blockwise over dimension n + c, so positions
    integrate the velocities and the spectrum is {0} union spec(-U)."""
    k = sys.dim_primal + sys.num_constraints
    M = np.zeros((2 * k, 2 * k))
    M[:k, k:] = np.eye(k)
    M[k:, k:] = -qp_system_matrix(sys)
    return M


@dataclass
class FlowResult:
    """Sampled continuous-time flow: times plus x, mu and their velocities
    (rows indexed by sample)."""

    times: np.ndarray
    x: np.ndarray
    mu: np.ndarray
    xdot: np.ndarray
    mudot: np.ndarray
    flagged: bool  # True when integration stopped early on non-finite state


def default_flow_dt(sys: QPSystem) -> float:
    """Fixed integration step 0.01 / max(1, spectral radius of U)."""
    radius = float(np.max(np.abs(np.linalg.eigvals(qp_system_matrix(sys)))))
    return 0.01 / max(1.0, radius)


def flow_initial_state(sys: QPSystem, x0, mu0) -> np.ndarray:
    """Initial state consistent with the first-order flow: xdot(0) follows
    the primal descent direction and mudot(0) the PI ascent direction."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    mu0 = np.atleast_1d(np.asarray(mu0, dtype=np.float64))
    if x0.shape != (sys.dim_primal,):
        raise ConfigurationError(f"x0 must have length {sys.dim_primal}")
    if mu0.shape != (sys.num_constraints,):
        raise ConfigurationError(f"mu0 must have length {sys.num_constraints}")
    xdot0 = -(sys.H @ x0 + sys.c_lin + sys.A.T @ mu0)
    mudot0 = sys.ki * (sys.A @ x0 - sys.b) + sys.kp * (sys.A @ xdot0)
    return np.concatenate([x0, mu0, xdot0, mudot0])


def simulate_flow(sys: QPSystem, x0, mu0, dt: float | None = None,
                  t_end: float = 10.0, max_samples: int = 20001) -> FlowResult:
    """Integrate the linear flow with classical fixed-step RK4.

    Every step advances by dt (plus one final shorter step so the last
    sample lands exactly on t_end); when the horizon spans more steps than
    max_samples, only every k-th state is stored.
    """
    if dt is None:
        dt = default_flow_dt(sys)
    if dt <= 0.0:
        raise ConfigurationError("dt must be positive")
    M = flow_state_matrix(sys)
    z = flow_initial_state(sys, x0, mu0)
    n, c = sys.dim_primal, sys.num_constraints

    num_full = int(np.floor(t_end / dt + 1e-12))
    remainder = t_end - num_full * dt
    has_remainder = remainder > 1e-12 * max(1.0, t_end)
    total_steps = num_full + (1 if has_remainder else 0)
    stride = max(1, -(-total_steps // max(1, max_samples - 1)))

    def rk4_operator(step):
        # One classical RK4 step of zdot = Mz is the constant linear map
        # I + step M + step^2 M^2/2 + step^3 M^3/6 + step^4 M^4/24.
        R = np.eye(M.shape[0])
        term = np.eye(M.shape[0])
        for order in range(1, 5):
            term = term @ (step / order * M)
            R = R + term
        return R

    R = rk4_operator(dt)
    R_rem = rk4_operator(remainder) if has_remainder else None

    times = [0.0]
    states = [z.copy()]
    flagged = False
    t = 0.0

    for i in range(total_steps):
        if has_remainder and i == num_full:
            z = R_rem @ z
            t += remainder
        else:
            z = R @ z
            t += dt
        if (i + 1) % stride == 0 or i == total_steps - 1:
            if not np.all(np.isfinite(z)):
                flagged = True
                break
            times.append(t)
            states.append(z.copy())

    arr = np.array(states)
    return FlowResult(
        times=np.array(times),
        x=arr[:, :n],
        mu=arr[:, n:n + c],
        xdot=arr[:, n + c:2 * n + c],
        mudot=arr[:, 2 * n + c:],
        flagged=flagged,
    )


def kkt_solve_qp(sys: QPSystem) -> tuple:
    """Solve the stationarity system [[H, A'], [A, 0]] [x; mu] = [-c; b].

    Residuals are checked to 1e-9; a singular or badly conditioned system is
    reported with a condition estimate.
    """
    n, c = sys.dim_primal, sys.num_constraints
    K = np.zeros((n + c, n + c))
    K[:n, :n] = sys.H
    K[:n, n:] = sys.A.T
    K[n:, :n] = sys.A
    rhs = np.concatenate([-sys.c_lin, sys.b])
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"singular KKT matrix (condition estimate {np.linalg.cond(K):.3e})"
        ) from exc
    x_star, mu_star = sol[:n], sol[n:]
    stat = np.max(np.abs(sys.H @ x_star + sys.c_lin + sys.A.T @ mu_star), initial=0.0)
    feas = np.max(np.abs(sys.A @ x_star - sys.b), initial=0.0)
    if stat > 1e-9 or feas > 1e-9:
        raise NumericalError(
            f"KKT solve residuals too large (stationarity {stat:.3e}, feasibility "
            f"{feas:.3e}); condition estimate {np.linalg.cond(K):.3e}"
        )
    return x_star, mu_star
