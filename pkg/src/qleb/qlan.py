"""Verification harness for quantum local asymptotic normality.

Collective observables X_i = (1/sqrt(n)) sum_k A_i^(k) over n i.i.d. sites
have quasi-characteristic functions that factorize exactly:

    Tr rho^(x n) prod_t exp(i xi_t . X) = ( Tr rho prod_t exp(i xi_t . A / sqrt(n)) )^n

so finite-n values are cheap at any n, and a dense tensor-power oracle is
kept around for small n to check the factorization itself. The reports
compare finite-n values against the Gaussian limit laws from ``gaussian``
and fit the decay rate of the error.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import decomp
from .errors import (
    DerivativeLeavesSupportError,
    DerivativeUnstableError,
    DimensionMismatchError,
    DimensionTooLargeError,
    NotCenteredError,
    QueryOutOfSafeRangeError,
    SupportViolationError,
)
from .gaussian import GaussianSpec, as_query, lecam_limit_spec, qcf
from .linalg import eig_hermitian, expm, hermitian_part, hermitize, positive

#: central-difference step for state derivatives
FD_STEP = 1e-5

#: weight allowed outside the reference support before the derivative is rejected
FD_TOL = 1e-7

#: per-site traces must stay within this distance of 1 for a safe n-th power
QCF_GUARD = 0.3

#: cap on dim**n for the dense tensor-power oracle
BRUTE_DIM_CAP = 4096

#: fitted log-log slope must be at most this for a convergence verdict
RATE_THRESHOLD = -0.45

#: errors below this floor, scaled by n, count as converged outright; the
#: n-th power amplifies per-site rounding by a factor of n, so a flat floor
#: would misread exactly-converged studies as noise
ERROR_FLOOR = 1e-14

#: fitted slope of log g vs log ||h|| must be at least this for the
#: second-order normalization verdict
OH2_SLOPE_THRESHOLD = 0.5


@dataclass(frozen=True)
class ParametricModel:
    """A parametric family of density operators theta -> rho_theta."""

    name: str
    dim: int
    theta_dim: int
    theta0: np.ndarray
    state_at: Callable[[np.ndarray], np.ndarray]

    def state0(self) -> np.ndarray:
        return self.state_at(np.asarray(self.theta0, dtype=float))


def check_model(model: ParametricModel, thetas, cutoff: float | None = None) -> None:
    """Assert the family is made of densities dominating the base state."""
    rho0 = positive(model.state0(), cutoff)
    if abs(rho0.trace() - 1.0) > 1e-10:
        raise ValueError(f"state at theta0 has trace {rho0.trace()!r}")
    for theta in thetas:
        theta = np.asarray(theta, dtype=float)
        st = positive(model.state_at(theta), cutoff)
        if st.dim != model.dim:
            raise DimensionMismatchError(
                f"state at {theta} has dimension {st.dim}, expected {model.dim}"
            )
        if abs(st.trace() - 1.0) > 1e-10:
            raise ValueError(f"state at {theta} has trace {st.trace()!r}")
        if not decomp.is_absolutely_continuous(rho0, st, cutoff):
            raise SupportViolationError(
                f"state at {theta} does not dominate the base state", theta=theta
            )


def _partial_state(model: ParametricModel, direction: int, step: float) -> np.ndarray:
    """Richardson-extrapolated central difference of theta -> rho_theta."""
    t0 = np.asarray(model.theta0, dtype=float)
    e = np.zeros_like(t0)
    e[direction] = 1.0

    def central(s: float) -> np.ndarray:
        return (model.state_at(t0 + s * e) - model.state_at(t0 - s * e)) / (2 * s)

    d1 = central(step)
    d2 = central(step / 2)
    return (4.0 * d2 - d1) / 3.0


def sld(model: ParametricModel, direction: int, step: float = FD_STEP,
        cutoff: float | None = None) -> np.ndarray:
    """Symmetric logarithmic derivative L_i at theta0.

    Solves d rho / d theta^i = (rho L + L rho) / 2 in the eigenbasis of
    rho_theta0, zeroing the blocks where both eigenvalues vanish. Derivative
    weight on those blocks means the family leaves the support to first
    order, which is rejected.
    """
    if not 0 <= direction < model.theta_dim:
        raise DimensionMismatchError(
            f"direction {direction} out of range for theta_dim {model.theta_dim}"
        )
    rho0 = positive(model.state0(), cutoff)
    drho = _partial_state(model, direction, step)
    gap = float(np.max(np.abs(drho - drho.conj().T)))
    if gap > FD_TOL:
        raise DerivativeUnstableError(
            f"state derivative is not Hermitian within {FD_TOL:.1e} (gap {gap:.3e})"
        )
    drho = hermitian_part(drho)
    tr = abs(float(np.trace(drho).real))
    if tr > FD_TOL:
        raise DerivativeUnstableError(
            f"state derivative has trace {tr:.3e}; the family is not trace-preserving"
        )
    w = rho0.eigenvalues
    v = rho0.eigenvectors
    db = v.conj().T @ drho @ v
    den = w[:, None] + w[None, :]
    alive = den > rho0.rank_tol
    leak = float(np.max(np.abs(np.where(alive, 0.0, db)))) if db.size else 0.0
    if leak > FD_TOL:
        raise DerivativeLeavesSupportError(
            f"derivative weight {leak:.3e} outside the support of the base state"
        )
    lb = np.where(alive, 2.0 * db / np.where(alive, den, 1.0), 0.0)
    return hermitian_part(v @ lb @ v.conj().T)


@dataclass(frozen=True)
class SldSet:
    """All SLD directions at theta0 plus the induced information matrix."""

    l_ops: tuple[np.ndarray, ...]
    j_matrix: np.ndarray


def fisher_j(model: ParametricModel, cutoff: float | None = None) -> np.ndarray:
    """Information matrix J_ij = Tr rho_theta0 L_j L_i."""
    return sld_set(model, cutoff).j_matrix


def sld_set(model: ParametricModel, cutoff: float | None = None) -> SldSet:
    rho0 = hermitize(model.state0())
    ls = tuple(sld(model, i, cutoff=cutoff) for i in range(model.theta_dim))
    k = model.theta_dim
    j = np.zeros((k, k), dtype=complex)
    for i in range(k):
        for jj in range(k):
            j[i, jj] = np.trace(rho0 @ ls[jj] @ ls[i])
    j = hermitize(j, tol=1e-8)
    # J itself is a Gram matrix and may be singular (pure models saturate
    # the uncertainty bound); only a singular covariance Re J degenerates
    # the limit law
    v = np.linalg.eigvalsh(j.real + j.real.T) / 2.0
    if v[0] < 1e-12 * max(1.0, float(v[-1])):
        warnings.warn(
            "covariance Re J is not strictly positive definite; "
            "the Gaussian limit law is degenerate",
            stacklevel=2,
        )
    return SldSet(l_ops=ls, j_matrix=j)


def _combination(ops: Sequence[np.ndarray], xi: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(np.asarray(ops[0], dtype=complex))
    for c, op in zip(xi, ops):
        acc = acc + c * np.asarray(op, dtype=complex)
    return acc


def _site_trace(state: np.ndarray, ops: Sequence[np.ndarray], query: np.ndarray,
                scale: float, extra: np.ndarray | None = None,
                etas: np.ndarray | None = None) -> complex:
    d = state.shape[0]
    prod = np.eye(d, dtype=complex)
    for t in range(query.shape[0]):
        gen = _combination(ops, query[t])
        if extra is not None and etas is not None:
            gen = gen + etas[t] * extra
        prod = prod @ expm(1j * scale * gen)
    return complex(np.trace(state @ prod))


def collective_qcf_factorized(site_state, site_ops, query, n: int,
                              guard: float = QCF_GUARD) -> complex:
    """QCF of collective observables over n sites, via exact factorization.

    Computes z = Tr rho prod_t exp(i xi_t . A / sqrt(n)) and returns z^n
    through the principal logarithm. The identity z^n = exp(n log z) is exact
    for integer n on any branch; the |z - 1| < guard requirement keeps the
    logarithm well conditioned and the power away from underflow, and
    queries violating it are rejected.
    """
    state = hermitize(site_state)
    ops = [hermitize(op) for op in site_ops]
    q = as_query(query, len(ops))
    if int(n) < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    z = _site_trace(state, ops, q, 1.0 / np.sqrt(n))
    if abs(z - 1.0) >= guard:
        raise QueryOutOfSafeRangeError(
            f"per-site trace {z:.6f} strays {abs(z - 1.0):.3f} from 1 "
            f"(guard {guard}); shrink ||xi|| / sqrt(n)"
        )
    return complex(np.exp(n * np.log(z)))


def _kron_chain(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.array([[1.0 + 0.0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def collective_qcf_brute(site_state, site_ops, query, n: int) -> complex:
    """Dense tensor-power oracle for the collective QCF (small n only)."""
    state = hermitize(site_state)
    ops = [hermitize(op) for op in site_ops]
    q = as_query(query, len(ops))
    n = int(n)
    d = state.shape[0]
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if d ** n > BRUTE_DIM_CAP:
        raise DimensionTooLargeError(
            f"dense tensor power would be {d ** n}-dimensional (cap {BRUTE_DIM_CAP})"
        )
    big_state = _kron_chain([state] * n)
    eye = np.eye(d, dtype=complex)
    big_ops = []
    for op in ops:
        acc = np.zeros((d ** n, d ** n), dtype=complex)
        for k in range(n):
            acc += _kron_chain([eye] * k + [op] + [eye] * (n - k - 1))
        big_ops.append(acc / np.sqrt(n))
    dim_big = d ** n
    prod = np.eye(dim_big, dtype=complex)
    for t in range(q.shape[0]):
        prod = prod @ expm(1j * _combination(big_ops, q[t]))
    return complex(np.trace(big_state @ prod))


@dataclass(frozen=True)
class ConvergenceReport:
    """Max error against a limit law per n, with a fitted decay rate."""

    study: str
    n_values: tuple[int, ...]
    errors: tuple[float, ...]
    fitted_rate: float | None
    verdict: str
    rate_threshold: float
    monotone: bool

    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json_dict(self) -> dict:
        return {
            "n": list(self.n_values),
            "errors": list(self.errors),
            "fitted_rate": self.fitted_rate,
            "verdict": self.verdict,
            "study": self.study,
            "rate_threshold": self.rate_threshold,
            "monotone": self.monotone,
        }


def _normalize_n_grid(n_grid) -> tuple[int, ...]:
    ns = tuple(int(n) for n in n_grid)
    if len(ns) < 2:
        raise ValueError("need at least two n values to fit a rate")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError(f"n grid must be strictly increasing, got {ns}")
    return ns


def _rate_report(study: str, ns: tuple[int, ...], errors: list[float],
                 rate_threshold: float) -> ConvergenceReport:
    errs = tuple(float(e) for e in errors)
    if all(e <= ERROR_FLOOR * n for e, n in zip(errs, ns)):
        return ConvergenceReport(study, ns, errs, None, "pass", rate_threshold, True)
    monotone = all(b < a for a, b in zip(errs, errs[1:]))
    fit = None
    if min(errs) > 0:
        slope, _ = np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(errs)), 1)
        fit = float(slope)
    ok = monotone and fit is not None and fit <= rate_threshold
    return ConvergenceReport(study, ns, errs, fit, "pass" if ok else "fail",
                             rate_threshold, monotone)


def _normalize_queries(query_grid, dim: int) -> list[np.ndarray]:
    queries = [as_query(q, dim) for q in query_grid]
    if not queries:
        raise ValueError("query grid is empty")
    return queries


def qclt_report(model: ParametricModel, query_grid, n_grid,
                rate_threshold: float = RATE_THRESHOLD,
                cutoff: float | None = None) -> ConvergenceReport:
    """Central-limit check: collective SLD observables against N(0, J)."""
    ns = _normalize_n_grid(n_grid)
    slds = sld_set(model, cutoff)
    queries = _normalize_queries(query_grid, model.theta_dim)
    limit = GaussianSpec(np.zeros(model.theta_dim), slds.j_matrix)
    rho0 = hermitize(model.state0())
    errors = []
    for n in ns:
        err = max(
            abs(collective_qcf_factorized(rho0, slds.l_ops, q, n) - qcf(limit, q))
            for q in queries
        )
        errors.append(err)
    return _rate_report("qclt", ns, errors, rate_threshold)


def _centered_or_raise(rho0: np.ndarray, ops: Sequence[np.ndarray]) -> None:
    for i, op in enumerate(ops):
        mean = abs(complex(np.trace(rho0 @ op)))
        if mean > 1e-10 * max(1.0, float(np.max(np.abs(op)))):
            raise NotCenteredError(
                f"site observable {i} has mean {mean:.3e} in the base state"
            )


def lecam_report(model: ParametricModel, b_ops, h, query_grid, n_grid,
                 rate_threshold: float = RATE_THRESHOLD,
                 cutoff: float | None = None) -> ConvergenceReport:
    """Third-lemma check: shifted collective observables against N((Re tau) h, Sigma).

    Sigma_ij = Tr rho0 B_j B_i and tau_ij = Tr rho0 L_j B_i. Each n is
    evaluated under the local shift theta0 + h / sqrt(n); shifts that break
    absolute continuity of the base state raise SupportViolationError.
    """
    ns = _normalize_n_grid(n_grid)
    ops = [hermitize(op) for op in b_ops]
    h = np.asarray(h, dtype=float).reshape(-1)
    if h.shape[0] != model.theta_dim:
        raise DimensionMismatchError(
            f"h has dimension {h.shape[0]}, expected {model.theta_dim}"
        )
    rho0 = hermitize(model.state0())
    _centered_or_raise(rho0, ops)
    slds = sld_set(model, cutoff)
    k = len(ops)
    sigma = np.zeros((k, k), dtype=complex)
    tau = np.zeros((k, model.theta_dim), dtype=complex)
    for i in range(k):
        for j in range(k):
            sigma[i, j] = np.trace(rho0 @ ops[j] @ ops[i])
        for j in range(model.theta_dim):
            tau[i, j] = np.trace(rho0 @ slds.l_ops[j] @ ops[i])
    limit = lecam_limit_spec(sigma, tau, h)
    queries = _normalize_queries(query_grid, k)
    base = positive(rho0, cutoff)
    t0 = np.asarray(model.theta0, dtype=float)
    errors = []
    for n in ns:
        theta_n = t0 + h / np.sqrt(n)
        rho_n = hermitize(model.state_at(theta_n))
        if not decomp.is_absolutely_continuous(base, rho_n, cutoff):
            raise SupportViolationError(
                f"shifted state at n = {n} does not dominate the base state",
                n=n,
                theta=theta_n,
            )
        err = max(
            abs(collective_qcf_factorized(rho_n, ops, q, n) - qcf(limit, q))
            for q in queries
        )
        errors.append(err)
    return _rate_report("lecam", ns, errors, rate_threshold)


def sandwich_qcf(model: ParametricModel, h, query, n: int, site_ops=None,
                 cutoff: float | None = None) -> complex:
    """QCF with the shifted state replaced by its sandwich exp(L/2) rho0 exp(L/2).

    L is the symmetric log-likelihood ratio of the shifted state along the
    base state, so the sandwich is exactly the absolutely continuous part of
    the shifted state; the gap to the true shifted QCF is controlled by the
    singular mass. Site observables default to the SLDs.
    """
    h = np.asarray(h, dtype=float).reshape(-1)
    if h.shape[0] != model.theta_dim:
        raise DimensionMismatchError(
            f"h has dimension {h.shape[0]}, expected {model.theta_dim}"
        )
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    ops = [hermitize(op) for op in site_ops] if site_ops is not None else list(
        sld_set(model, cutoff).l_ops
    )
    t0 = np.asarray(model.theta0, dtype=float)
    rho0 = hermitize(model.state0())
    rho_n = model.state_at(t0 + h / np.sqrt(n))
    l_matrix = decomp.qllr(rho_n, rho0, cutoff).l_matrix
    half = expm(l_matrix / 2.0)
    sandwiched = hermitian_part(half @ rho0 @ half)
    q = as_query(query, len(ops))
    z = _site_trace(sandwiched, ops, q, 1.0 / np.sqrt(n))
    if abs(z - 1.0) >= QCF_GUARD:
        raise QueryOutOfSafeRangeError(
            f"per-site trace {z:.6f} strays {abs(z - 1.0):.3f} from 1"
        )
    return complex(np.exp(n * np.log(z)))


def sandwich_report(model: ParametricModel, h, query_grid, n_grid,
                    rate_threshold: float = RATE_THRESHOLD,
                    cutoff: float | None = None) -> ConvergenceReport:
    """Gap between the sandwiched and true shifted collective QCFs, per n."""
    ns = _normalize_n_grid(n_grid)
    ops = list(sld_set(model, cutoff).l_ops)
    queries = _normalize_queries(query_grid, len(ops))
    t0 = np.asarray(model.theta0, dtype=float)
    h = np.asarray(h, dtype=float).reshape(-1)
    errors = []
    for n in ns:
        rho_n = hermitize(model.state_at(t0 + h / np.sqrt(n)))
        gap = max(
            abs(
                sandwich_qcf(model, h, q, n, site_ops=ops, cutoff=cutoff)
                - collective_qcf_factorized(rho_n, ops, q, n)
            )
            for q in queries
        )
        errors.append(gap)
    return _rate_report("sandwich", ns, errors, rate_threshold)


@dataclass(frozen=True)
class Oh2Report:
    """Second-order normalization: g(h) = (1 - Tr rho0 e^{L_h}) / ||h||^2."""

    radii: tuple[float, ...]
    g_values: tuple[float, ...]
    slope: float | None
    g_at_smallest_radius: float
    slope_threshold: float
    verdict: str

    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json_dict(self) -> dict:
        return {
            "radii": list(self.radii),
            "g_values": list(self.g_values),
            "slope": self.slope,
            "g_at_smallest_radius": self.g_at_smallest_radius,
            "slope_threshold": self.slope_threshold,
            "verdict": self.verdict,
        }


def _sphere_directions(dim: int, count: int, seed: int) -> np.ndarray:
    if dim == 2:
        angles = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(angles), np.sin(angles)])
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((count, dim))
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def oh2_report(model: ParametricModel, radii=(0.2, 0.1, 0.05, 0.025),
               n_directions: int = 8, seed: int = 0,
               slope_threshold: float = OH2_SLOPE_THRESHOLD,
               cutoff: float | None = None) -> Oh2Report:
    """Check Tr rho0 e^{L_h} = 1 - o(||h||^2) along shrinking radii.

    g(h) = (1 - Tr rho0 e^{L_h}) / ||h||^2 is maximized over directions at
    each radius; the verdict passes iff g vanishes identically (within
    1e-10) or fits a positive log-log slope of at least ``slope_threshold``.
    """
    radii = tuple(sorted((float(r) for r in radii), reverse=True))
    if len(radii) < 2 or radii[-1] <= 0:
        raise ValueError("need at least two positive radii")
    dirs = _sphere_directions(model.theta_dim, n_directions, seed)
    rho0 = hermitize(model.state0())
    t0 = np.asarray(model.theta0, dtype=float)
    g_values = []
    for r in radii:
        worst = -np.inf
        for u in dirs:
            theta = t0 + r * u
            l_matrix = decomp.qllr(model.state_at(theta), rho0, cutoff).l_matrix
            tr = float(np.trace(rho0 @ expm(l_matrix)).real)
            worst = max(worst, (1.0 - tr) / (r * r))
        g_values.append(float(worst))
    gs = np.asarray(g_values)
    if np.max(np.abs(gs)) <= 1e-10:
        return Oh2Report(radii, tuple(g_values), None, g_values[-1],
                         slope_threshold, "pass")
    slope = None
    if np.min(gs) > 0:
        slope = float(np.polyfit(np.log(np.asarray(radii)), np.log(gs), 1)[0])
    ok = slope is not None and slope >= slope_threshold
    return Oh2Report(radii, tuple(g_values), slope, g_values[-1],
                     slope_threshold, "pass" if ok else "fail")


@dataclass(frozen=True)
class ProbeReport:
    """Joint QCF of collective observables with an infinitesimal remainder.

    ``deviation`` is the distance of the eta-perturbed finite-n QCF from the
    eta-free Gaussian limit; ``excess`` is its distance from the eta-free
    finite-n QCF (zero iff the remainder contributes nothing).
    """

    n_values: tuple[int, ...]
    deviation: tuple[float, ...]
    excess: tuple[float, ...]
    ceiling: float
    verdict: str

    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json_dict(self) -> dict:
        return {
            "n": list(self.n_values),
            "deviation": list(self.deviation),
            "excess": list(self.excess),
            "ceiling": self.ceiling,
            "verdict": self.verdict,
        }


def infinitesimal_probe(remainder_rule: Callable[[int], np.ndarray],
                        model: ParametricModel, query_grid, eta_grid, n_grid,
                        ceiling: float = 0.05,
                        cutoff: float | None = None) -> ProbeReport:
    """Probe whether a site-local remainder R(n) is asymptotically negligible.

    Evaluates Tr rho^(x n) prod_t exp(i (xi_t . X + eta_t R(n)) / ... ) via
    site factorization at sampled real (xi, eta) and reports how far the
    values sit from the eta-free limit and from the eta-free finite-n values.
    """
    ns = _normalize_n_grid(n_grid)
    slds = sld_set(model, cutoff)
    ops = list(slds.l_ops)
    queries = _normalize_queries(query_grid, len(ops))
    etas = [float(e) for e in eta_grid]
    if not etas:
        raise ValueError("eta grid is empty")
    limit = GaussianSpec(np.zeros(len(ops)), slds.j_matrix)
    rho0 = hermitize(model.state0())
    deviations = []
    excesses = []
    for n in ns:
        extra = hermitize(remainder_rule(n))
        if extra.shape[0] != model.dim:
            raise DimensionMismatchError(
                f"remainder at n = {n} has dimension {extra.shape[0]}, "
                f"expected {model.dim}"
            )
        dev = 0.0
        exc = 0.0
        scale = 1.0 / np.sqrt(n)
        for q in queries:
            plain = collective_qcf_factorized(rho0, ops, q, n)
            lim = qcf(limit, q)
            for eta in etas:
                eta_vec = np.full(q.shape[0], eta)
                z = _site_trace(rho0, ops, q, scale, extra=extra, etas=eta_vec)
                if abs(z - 1.0) >= QCF_GUARD:
                    raise QueryOutOfSafeRangeError(
                        f"per-site trace {z:.6f} strays {abs(z - 1.0):.3f} from 1"
                    )
                joint = complex(np.exp(n * np.log(z)))
                dev = max(dev, abs(joint - lim))
                exc = max(exc, abs(joint - plain))
        deviations.append(dev)
        excesses.append(exc)
    ok = (
        deviations[-1] <= ceiling
        and deviations[-1] <= deviations[0] + 1e-12
        and excesses[-1] <= ceiling
    )
    return ProbeReport(ns, tuple(deviations), tuple(excesses), ceiling,
                       "pass" if ok else "fail")


def iid_remainder_rule(model: ParametricModel, h,
                       cutoff: float | None = None) -> Callable[[int], np.ndarray]:
    """Remainder of the i.i.d. expansion of L at the local shift h / sqrt(n).

    R(n) = sqrt(n) ( L_{h/sqrt(n)} - h^i L_i / sqrt(n) + (h^i h^j J_ij / 2n) I );
    for a second-order-normalized family this tends to zero with n.
    """
    h = np.asarray(h, dtype=float).reshape(-1)
    slds = sld_set(model, cutoff)
    lin = _combination(slds.l_ops, h)
    jquad = float((h @ (slds.j_matrix @ h)).real)
    rho0 = hermitize(model.state0())
    t0 = np.asarray(model.theta0, dtype=float)
    eye = np.eye(model.dim, dtype=complex)

    def rule(n: int) -> np.ndarray:
        rn = np.sqrt(float(n))
        l_matrix = decomp.qllr(model.state_at(t0 + h / rn), rho0, cutoff).l_matrix
        return rn * (l_matrix - lin / rn + (jquad / (2.0 * n)) * eye)

    return rule
