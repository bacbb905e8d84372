"""Model presets, reproducible spin-chain reservoirs, and JSON scenario
configs (parse, validate, serialize round-trip)."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import Scenario
from .linalg import hermiticity_defect, op_norm, tensor
from .states import gibbs, maximally_mixed, random_density, random_hermitian

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

MAX_CHAIN_SITES = 12
DEFAULT_CLUSTER_TOL = 1e-9
DEFAULT_QUAD_TOL = 1e-8


class ConfigError(ValueError):
    """A scenario config file is malformed; the message names the field."""


def build_chain_reservoir(
    n: int,
    j_coupling: float,
    field: float,
    seed: int | None = None,
    disorder: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Open transverse-field spin chain and its edge coupling operator.

    H_R = j_coupling * sum sx_i sx_{i+1} + sum h_i sz_i with site fields
    h_i = field + disorder * xi_i, xi_i standard normal from ``seed``
    (bit-for-bit reproducible).  Returns (H_R, B_edge) where B_edge is sx on
    the first site, the operator through which couplings V = A (x) B_edge
    enter.  The site count is capped: the joint space and its matrix
    operations grow as 4^n.
    """
    if not 1 <= n <= MAX_CHAIN_SITES:
        mem = (2 ** (2 * n)) * 16 / 1e9
        raise ValueError(
            f"chain size n={n} outside [1, {MAX_CHAIN_SITES}] "
            f"(a single reservoir matrix alone would take ~{mem:.1f} GB)"
        )
    fields = np.full(n, float(field))
    if disorder != 0.0:
        rng = np.random.default_rng(seed)
        fields = fields + disorder * rng.standard_normal(n)
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)

    def site_op(op: np.ndarray, site: int) -> np.ndarray:
        mats = [np.eye(2, dtype=complex)] * n
        mats[site] = op
        return tensor(*mats)

    for i in range(n):
        h += fields[i] * site_op(SIGMA_Z, i)
    for i in range(n - 1):
        h += j_coupling * site_op(SIGMA_X, i) @ site_op(SIGMA_X, i + 1)
    return h, site_op(SIGMA_X, 0)


def ladder_hamiltonian(dim: int) -> np.ndarray:
    """diag(0, 1, ..., dim-1): equally spaced levels."""
    return np.diag(np.arange(dim, dtype=complex))


def hopping_operator(dim: int) -> np.ndarray:
    """Nearest-level flip sum |k><k+1| + |k+1><k| (sx for dim = 2)."""
    a = np.zeros((dim, dim), dtype=complex)
    for k in range(dim - 1):
        a[k, k + 1] = a[k + 1, k] = 1.0
    return a


def random_scenario(
    rng: np.random.Generator,
    dim_sys: int = 2,
    dim_res: int = 4,
    lam: float | None = None,
    beta: float | None = None,
    commuting_init: bool = False,
) -> Scenario:
    """Random scenario with unit-scale Hamiltonians; reproducible via rng.

    ``commuting_init`` draws the initial system state diagonal in the system
    energy eigenbasis (no first-measurement back-action).
    """
    h_sys = random_hermitian(dim_sys, rng)
    h_res = random_hermitian(dim_res, rng)
    v = random_hermitian(dim_sys * dim_res, rng)
    if lam is None:
        lam = float(rng.uniform(0.0, 0.5))
    if beta is None:
        beta = float(rng.uniform(0.5, 2.0))
    if commuting_init:
        w = rng.uniform(0.1, 1.0, size=dim_sys)
        _, vecs = np.linalg.eigh(h_sys)
        rho_sys = (vecs * (w / w.sum())) @ vecs.conj().T
    else:
        rho_sys = random_density(dim_sys, rng)
    return Scenario(h_sys=h_sys, h_res=h_res, v=v, lam=lam, beta=beta, rho_sys=rho_sys)


# -- JSON config --------------------------------------------------------------


def matrix_to_pairs(a: np.ndarray) -> list:
    """Serialize a complex matrix as row-major [re, im] pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a, dtype=complex)]


def pairs_to_matrix(rows: list, field_name: str) -> np.ndarray:
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{field_name}: not a numeric [re, im] matrix: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ConfigError(
            f"{field_name}: expected a square matrix of [re, im] pairs, got shape {arr.shape}"
        )
    return arr[:, :, 0] + 1j * arr[:, :, 1]


@dataclass(frozen=True)
class RunConfig:
    """A parsed scenario plus the numerical tolerances of the run."""

    scenario: Scenario
    cluster_tol: float = DEFAULT_CLUSTER_TOL
    quad_tol: float = DEFAULT_QUAD_TOL


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ConfigError(f"{context}: missing required field '{key}'")
    return mapping[key]


def _as_object(value, context: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{context}: expected a JSON object, got {type(value).__name__}")
    return value


def _check_hermitian_field(a: np.ndarray, field_name: str) -> np.ndarray:
    defect = hermiticity_defect(a)
    if defect > 1e-12 * max(1.0, op_norm(a)):
        raise ConfigError(f"{field_name}: matrix is not Hermitian (asymmetry norm {defect:.3e})")
    return a


def _system_from_config(cfg: dict) -> tuple[np.ndarray, np.ndarray, float | None]:
    cfg = _as_object(cfg, "system")
    dim = _require(cfg, "dim", "system")
    if not isinstance(dim, int) or dim < 1:
        raise ConfigError(f"system.dim: expected a positive integer, got {dim!r}")
    ham = _as_object(_require(cfg, "hamiltonian", "system"), "system.hamiltonian")
    if "matrix" in ham:
        h = _check_hermitian_field(pairs_to_matrix(ham["matrix"], "system.hamiltonian.matrix"),
                                   "system.hamiltonian.matrix")
    elif ham.get("preset") == "ladder":
        h = ladder_hamiltonian(dim)
    else:
        raise ConfigError(
            f"system.hamiltonian: expected 'matrix' or preset 'ladder', got {ham!r}"
        )
    if h.shape[0] != dim:
        raise ConfigError(
            f"system.hamiltonian: dimension {h.shape[0]} != system.dim {dim}"
        )
    state_cfg = _as_object(cfg.get("initial_state", {"preset": "ground"}), "system.initial_state")
    return h, *_initial_state_from_config(state_cfg, h, dim)


def _initial_state_from_config(cfg: dict, h: np.ndarray, dim: int):
    if "matrix" in cfg:
        rho = _check_hermitian_field(pairs_to_matrix(cfg["matrix"], "system.initial_state.matrix"),
                                     "system.initial_state.matrix")
        if rho.shape[0] != dim:
            raise ConfigError("system.initial_state: dimension mismatch")
        return rho, None
    preset = cfg.get("preset", "ground")
    if preset == "ground":
        _, v = np.linalg.eigh(h)
        rho = np.outer(v[:, 0], v[:, 0].conj())
    elif preset == "excited":
        _, v = np.linalg.eigh(h)
        rho = np.outer(v[:, -1], v[:, -1].conj())
    elif preset == "maximally_mixed":
        rho = maximally_mixed(dim)
    elif preset == "thermal":
        # Needs beta, resolved by the caller once beta is known.
        return None, float(cfg.get("beta_scale", 1.0))
    else:
        raise ConfigError(f"system.initial_state.preset: unknown preset {preset!r}")
    return rho, None


def _reservoir_from_config(cfg: dict) -> tuple[np.ndarray, np.ndarray | None]:
    cfg = _as_object(cfg, "reservoir")
    if "matrix" in cfg:
        h = _check_hermitian_field(pairs_to_matrix(cfg["matrix"], "reservoir.matrix"),
                                   "reservoir.matrix")
        return h, None
    preset = _require(cfg, "preset", "reservoir")
    if preset != "chain":
        raise ConfigError(f"reservoir.preset: unknown preset {preset!r}")
    n = _require(cfg, "n", "reservoir")
    if not isinstance(n, int):
        raise ConfigError(f"reservoir.n: expected an integer, got {n!r}")
    try:
        h, edge = build_chain_reservoir(
            n,
            j_coupling=float(cfg.get("coupling", 1.0)),
            field=float(cfg.get("field", 1.0)),
            seed=cfg.get("seed"),
            disorder=float(cfg.get("disorder", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"reservoir: {exc}") from exc
    return h, edge


def _coupling_from_config(cfg: dict, dim_sys: int, dim_res: int, edge: np.ndarray | None):
    cfg = _as_object(cfg, "coupling")
    if "matrix" in cfg:
        v = _check_hermitian_field(pairs_to_matrix(cfg["matrix"], "coupling.matrix"),
                                   "coupling.matrix")
        if v.shape[0] != dim_sys * dim_res:
            raise ConfigError(
                f"coupling.matrix: dimension {v.shape[0]} != d_S*d_R = {dim_sys * dim_res}"
            )
        return v
    preset = cfg.get("preset", "edge_hopping")
    if preset != "edge_hopping":
        raise ConfigError(f"coupling.preset: unknown preset {preset!r}")
    if edge is None:
        edge = hopping_operator(dim_res)
    return tensor(hopping_operator(dim_sys), edge)


def config_to_scenario(cfg: dict) -> RunConfig:
    """Build a validated scenario from a parsed config mapping."""
    if not isinstance(cfg, dict):
        raise ConfigError("top level: expected a JSON object")
    beta = _require(cfg, "beta", "top level")
    try:
        beta = float(beta)
    except (TypeError, ValueError):
        raise ConfigError(f"beta: expected a number, got {beta!r}") from None

    h_sys, rho_sys, thermal_scale = _system_from_config(_require(cfg, "system", "top level"))
    h_res, edge = _reservoir_from_config(_require(cfg, "reservoir", "top level"))
    coupling_cfg = _as_object(_require(cfg, "coupling", "top level"), "coupling")
    v = _coupling_from_config(coupling_cfg, h_sys.shape[0], h_res.shape[0], edge)
    if "lambda" in coupling_cfg:
        lam = float(coupling_cfg["lambda"])
    else:
        warnings.warn(
            "coupling.lambda omitted: defaulting to 0 (uncoupled baseline run)",
            stacklevel=2,
        )
        lam = 0.0
    if rho_sys is None:
        rho_sys = gibbs(h_sys, beta * (thermal_scale or 1.0))

    tols = _as_object(cfg.get("tolerances", {}), "tolerances")
    run = RunConfig(
        scenario=_scenario_checked(h_sys, h_res, v, lam, beta, rho_sys),
        cluster_tol=float(tols.get("cluster_tol", DEFAULT_CLUSTER_TOL)),
        quad_tol=float(tols.get("quad_tol", DEFAULT_QUAD_TOL)),
    )
    return run


def _scenario_checked(h_sys, h_res, v, lam, beta, rho_sys) -> Scenario:
    try:
        return Scenario(h_sys=h_sys, h_res=h_res, v=v, lam=lam, beta=beta, rho_sys=rho_sys)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(path: str | Path) -> RunConfig:
    """Load, validate and build a scenario from a JSON config file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return config_to_scenario(cfg)


def scenario_to_config(run: RunConfig) -> dict:
    """Serialize a scenario to the explicit-matrix config form.

    Matrices round-trip bit for bit through JSON (floats serialize at full
    precision).
    """
    scn = run.scenario
    return {
        "system": {
            "dim": scn.dim_sys,
            "hamiltonian": {"matrix": matrix_to_pairs(scn.h_sys)},
            "initial_state": {"matrix": matrix_to_pairs(scn.rho_sys)},
        },
        "reservoir": {"matrix": matrix_to_pairs(scn.h_res)},
        "coupling": {"matrix": matrix_to_pairs(scn.v), "lambda": scn.lam},
        "beta": scn.beta,
        "tolerances": {"cluster_tol": run.cluster_tol, "quad_tol": run.quad_tol},
    }


def preset_config(name: str) -> dict:
    """Named ready-to-run configs used by the demos and the trivial-limit tests."""
    presets = {
        "qubit_qubit": {
            "system": {"dim": 2, "hamiltonian": {"preset": "ladder"},
                       "initial_state": {"preset": "ground"}},
            "reservoir": {"preset": "chain", "n": 1, "coupling": 0.0, "field": 0.5},
            "coupling": {"preset": "edge_hopping", "lambda": 0.2},
            "beta": 1.0,
        },
        "qubit_chain3": {
            "system": {"dim": 2, "hamiltonian": {"preset": "ladder"},
                       "initial_state": {"preset": "excited"}},
            "reservoir": {"preset": "chain", "n": 3, "coupling": 0.3, "field": 0.5},
            "coupling": {"preset": "edge_hopping", "lambda": 0.2},
            "beta": 1.0,
        },
        "qutrit_chain2": {
            "system": {"dim": 3, "hamiltonian": {"preset": "ladder"},
                       "initial_state": {"preset": "maximally_mixed"}},
            "reservoir": {"preset": "chain", "n": 2, "coupling": 0.8, "field": 0.6},
            "coupling": {"preset": "edge_hopping", "lambda": 0.3},
            "beta": 1.0,
        },
    }
    if name not in presets:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(presets)}")
    return presets[name]


def chain_scenario(
    n: int,
    lam: float = 0.2,
    beta: float = 1.0,
    j_coupling: float = 0.3,
    field: float = 0.5,
    seed: int | None = None,
    disorder: float = 0.0,
    excited: bool = True,
) -> Scenario:
    """Qubit (levels 0, 1) coupled through sx to the edge of an n-site chain.

    The defaults put the chain's single-flip cost 2*field on resonance with
    the unit qubit gap and keep the band narrow (j_coupling < field), so the
    excited qubit actually relaxes within moderate time windows; growing n
    postpones the finite-size recurrence.
    """
    h_sys = ladder_hamiltonian(2)
    h_res, edge = build_chain_reservoir(n, j_coupling, field, seed=seed, disorder=disorder)
    v = tensor(SIGMA_X, edge)
    rho_sys = np.diag([0.0, 1.0] if excited else [1.0, 0.0]).astype(complex)
    return Scenario(h_sys=h_sys, h_res=h_res, v=v, lam=lam, beta=beta, rho_sys=rho_sys)
