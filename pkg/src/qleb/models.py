"""Built-in parametric families and seeded random-instance generators.

The spin-1/2 families live on theta in R^2. The pure family

    rho_bar(theta) = e^{(theta.sigma - psi(theta) I)/2} |0><0| e^{(...)/2},
    psi(theta) = log cosh ||theta||

stays rank 1 with trace exactly 1; the perturbed family mixes in weight
1 - e^{-f(theta)} on the orthogonal pure state |1><1|, so its absolutely
continuous and singular parts along rho_bar(0) have closed forms that the
decomposition tests can check against.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidRanksError, NotUnitError
from .linalg import PositiveOperator, expm, hermitian_part, positive
from .matio import matrix_from_json_dict
from .qlan import ParametricModel

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

_GROUND = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
_EXCITED = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)

_F_RULES = {
    "quartic": lambda theta: float(np.linalg.norm(theta) ** 4),
    "cubic": lambda theta: float(np.linalg.norm(theta) ** 3),
    "squared": lambda theta: float(np.linalg.norm(theta) ** 2),
}


def _theta2(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != 2:
        raise DimensionMismatchError(f"theta must be a real 2-vector, got {theta}")
    return theta


def spin_pure_state(theta) -> np.ndarray:
    theta = _theta2(theta)
    r = float(np.linalg.norm(theta))
    # psi = log cosh r, kept overflow-free
    psi = float(np.logaddexp(r, -r) - np.log(2.0))
    gen = theta[0] * SIGMA_X + theta[1] * SIGMA_Y - psi * np.eye(2)
    half = expm(gen / 2.0)
    return hermitian_part(half @ _GROUND @ half)


def spin_perturbed_state(theta, f_rule="quartic") -> np.ndarray:
    theta = _theta2(theta)
    f = _F_RULES[f_rule] if isinstance(f_rule, str) else f_rule
    weight = float(np.exp(-f(theta)))
    return weight * spin_pure_state(theta) + (1.0 - weight) * _EXCITED


def spin_pure_model() -> ParametricModel:
    return ParametricModel(
        name="spin-pure",
        dim=2,
        theta_dim=2,
        theta0=np.zeros(2),
        state_at=spin_pure_state,
    )


def spin_perturbed_model(f_rule="quartic") -> ParametricModel:
    if isinstance(f_rule, str):
        if f_rule not in _F_RULES:
            raise ValueError(
                f"unknown f rule {f_rule!r}; choose from {sorted(_F_RULES)} "
                "or pass a callable"
            )
        name = f"spin-perturbed:{f_rule}"
    else:
        name = "spin-perturbed:custom"
    return ParametricModel(
        name=name,
        dim=2,
        theta_dim=2,
        theta0=np.zeros(2),
        state_at=lambda theta: spin_perturbed_state(theta, f_rule),
    )


def qubit_fullrank_model() -> ParametricModel:
    def state(theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape[0] != 1:
            raise DimensionMismatchError(f"theta must be a real 1-vector, got {theta}")
        if abs(theta[0]) >= 1.0:
            raise ValueError(f"|theta| must be < 1 for a full-rank state, got {theta[0]}")
        return 0.5 * (np.eye(2, dtype=complex) + theta[0] * SIGMA_Z)

    return ParametricModel(
        name="qubit-fullrank",
        dim=2,
        theta_dim=1,
        theta0=np.zeros(1),
        state_at=state,
    )


def table_model(path) -> ParametricModel:
    """Model backed by an exact lookup table {theta grid -> matrix}.

    Evaluation off the stored grid raises KeyError; in particular the
    finite-difference SLD machinery refuses table models unless the probe
    points were tabulated, which is the intended behavior.
    """
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    dim = int(obj["dim"])
    theta_dim = int(obj["theta_dim"])
    theta0 = np.asarray(obj["theta0"], dtype=float).reshape(-1)
    if theta0.shape[0] != theta_dim:
        raise DimensionMismatchError(
            f"theta0 has dimension {theta0.shape[0]}, declared theta_dim {theta_dim}"
        )
    table: dict[tuple, np.ndarray] = {}
    for row in obj["states"]:
        key = tuple(float(x) for x in row["theta"])
        if len(key) != theta_dim:
            raise DimensionMismatchError(f"grid point {key} has wrong dimension")
        matrix = matrix_from_json_dict(row["matrix"])
        if matrix.shape[0] != dim:
            raise DimensionMismatchError(
                f"state at {key} has dimension {matrix.shape[0]}, declared dim {dim}"
            )
        table[key] = matrix

    def state(theta) -> np.ndarray:
        key = tuple(float(x) for x in np.asarray(theta, dtype=float).reshape(-1))
        try:
            return table[key]
        except KeyError:
            raise KeyError(
                f"theta {key} is not on the table grid; interpolation is not supported"
            ) from None

    return ParametricModel(
        name=str(obj.get("name", f"table:{path}")),
        dim=dim,
        theta_dim=theta_dim,
        theta0=theta0,
        state_at=state,
    )


def get_model(name: str) -> ParametricModel:
    """Resolve a model by its CLI name."""
    if name == "spin-pure":
        return spin_pure_model()
    if name == "qubit-fullrank":
        return qubit_fullrank_model()
    if name == "spin-perturbed":
        return spin_perturbed_model()
    if name.startswith("spin-perturbed:"):
        return spin_perturbed_model(name.split(":", 1)[1])
    if name.startswith("table:"):
        return table_model(name.split(":", 1)[1])
    raise ValueError(
        f"unknown model {name!r}; known: spin-pure, spin-perturbed:quartic, "
        "spin-perturbed:cubic, spin-perturbed:squared, qubit-fullrank, table:<path>"
    )


@dataclass(frozen=True)
class RandomPsdPairSpec:
    """Deterministic recipe for a (rho, sigma) pair of positive operators."""

    dim: int
    rank_rho: int
    rank_sigma: int
    seed: int
    mode: str = "generic"


#: target overlap Tr rho sigma for the nearly-singular mode
NEAR_SINGULAR_OVERLAP = 1e-9

#: smallest kept eigenvalue in the near-rank-deficient mode
NEAR_DEFICIENT_EIG = 1e-8


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _psd_from(cols: np.ndarray, eigs: np.ndarray) -> np.ndarray:
    return hermitian_part((cols * eigs) @ cols.conj().T)


def random_psd_pair(spec: RandomPsdPairSpec) -> tuple[PositiveOperator, PositiveOperator]:
    """Seeded pair with prescribed ranks; see ``spec.mode`` for the geometry.

    generic: independent Haar frames. orthogonal: disjoint columns of one
    frame, so the supports are exactly orthogonal. near_singular: the
    orthogonal pair with sigma rotated just enough that Tr rho sigma lands
    near NEAR_SINGULAR_OVERLAP. near_deficient: generic with the smallest
    kept eigenvalue forced to NEAR_DEFICIENT_EIG on both operators.
    """
    d, kr, ks = spec.dim, spec.rank_rho, spec.rank_sigma
    if d < 1:
        raise InvalidRanksError(f"dim must be >= 1, got {d}")
    if not (1 <= kr <= d and 1 <= ks <= d):
        raise InvalidRanksError(
            f"ranks must lie in [1, {d}], got rank_rho={kr}, rank_sigma={ks}"
        )
    if spec.mode in ("orthogonal", "near_singular") and kr + ks > d:
        raise InvalidRanksError(
            f"mode {spec.mode!r} needs rank_rho + rank_sigma <= dim, "
            f"got {kr} + {ks} > {d}"
        )
    rng = np.random.default_rng(spec.seed)
    rho_eigs = rng.uniform(0.2, 1.0, size=kr)
    sigma_eigs = rng.uniform(0.2, 1.0, size=ks)
    if spec.mode == "near_deficient":
        rho_eigs[-1] = NEAR_DEFICIENT_EIG
        sigma_eigs[-1] = NEAR_DEFICIENT_EIG

    if spec.mode in ("generic", "near_deficient"):
        u = haar_unitary(d, rng)
        v = haar_unitary(d, rng)
        rho = _psd_from(u[:, :kr], rho_eigs)
        sigma = _psd_from(v[:, :ks], sigma_eigs)
        return positive(rho), positive(sigma)

    if spec.mode in ("orthogonal", "near_singular"):
        u = haar_unitary(d, rng)
        rho = _psd_from(u[:, :kr], rho_eigs)
        sigma = _psd_from(u[:, kr:kr + ks], sigma_eigs)
        if spec.mode == "orthogonal":
            return positive(rho), positive(sigma)
        gen = np.outer(u[:, 0], u[:, kr].conj())
        gen = gen - gen.conj().T
        sigma = _rotate_to_overlap(rho, sigma, gen, NEAR_SINGULAR_OVERLAP)
        return positive(rho), positive(sigma)

    raise ValueError(f"unknown mode {spec.mode!r}")


def _rotate_to_overlap(rho: np.ndarray, sigma: np.ndarray, gen: np.ndarray,
                       target: float) -> np.ndarray:
    """Conjugate sigma by e^{t gen} until Tr rho sigma sits near target."""

    def overlap(t: float) -> tuple[float, np.ndarray]:
        w = expm(t * gen)
        rotated = hermitian_part(w @ sigma @ w.conj().T)
        return float(np.trace(rho @ rotated).real), rotated

    # overlap grows like t^2 from exact zero, so a square-root update
    # followed by bisection converges in a handful of steps
    t = 1e-4
    value, rotated = overlap(t)
    for _ in range(8):
        if 0.8 * target <= value <= 1.25 * target:
            return rotated
        t *= np.sqrt(target / value)
        value, rotated = overlap(t)
    lo, hi = 0.0, t
    val_hi = value
    while val_hi < target:
        hi *= 2.0
        val_hi, rotated = overlap(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        value, rotated = overlap(mid)
        if 0.8 * target <= value <= 1.25 * target:
            return rotated
        if value < target:
            lo = mid
        else:
            hi = mid
    raise RuntimeError(f"could not reach overlap {target}; stuck at {value}")


def pure_pair(psi, xi) -> tuple[PositiveOperator, PositiveOperator]:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    if psi.shape != xi.shape:
        raise DimensionMismatchError(
            f"vectors have different dimensions {psi.shape[0]} and {xi.shape[0]}"
        )
    for label, vec in (("psi", psi), ("xi", xi)):
        gap = abs(float(np.linalg.norm(vec)) - 1.0)
        if gap > 1e-12:
            raise NotUnitError(f"{label} is off unit norm by {gap:.3e}")
    return positive(np.outer(psi, psi.conj())), positive(np.outer(xi, xi.conj()))
