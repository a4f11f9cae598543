"""JSON problem configuration: parsing, validation, and construction of problems.

Complex numbers are ``[re, im]`` pairs. Parsing fills every default, so
``ProblemConfig.from_dict(cfg.to_dict()) == cfg``.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import ansatz as az
from .landscape import LandscapeProblem, U1EscapeProblem
from .linalg import gellmann_basis, pauli_string, seeded_random_hermitian, unitary_algebra_basis
from .optimizer import GdConfig, InitDistribution, Regularization


class ConfigError(ValueError):
    """Invalid configuration; ``where`` names the offending field or source line."""

    def __init__(self, where, message):
        super().__init__(f"{where}: {message}")
        self.where = where


OPTIMIZER_DEFAULTS = {
    "gamma": 0.1,
    "max_iter": 100_000,
    "grad_tol": 1e-8,
    "diverge_norm": 1e6,
    "seed": 0,
    "regularization": None,
    "line_search": "fixed",
    "record_stride": 1,
}
INIT_DEFAULTS = {"distribution": "gaussian", "sigma": 1.0, "low": -np.pi, "high": np.pi, "fixed": {}}
SAMPLING_DEFAULTS = {"distribution": "heavy", "sigma": 1.0, "radius": None, "fixed": {},
                     "resonant_fraction": 0.0}
OUTPUT_DEFAULTS = {"dir": "out", "figures": True}
ANSATZ_VARIANTS = ("sud_gate", "poe", "euler_xyx", "generalized_euler", "cayley",
                   "composite", "arctan_squashed")


def _complex_array(value, where):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, f"expected numbers as [re, im] pairs ({exc})") from None
    if arr.shape[-1:] != (2,):
        raise ConfigError(where, "complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def complex_to_json(arr):
    arr = np.asarray(arr, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def _require(d, key, where, kind=None):
    if key not in d:
        raise ConfigError(f"{where}.{key}", "missing required field")
    val = d[key]
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"{where}.{key}", f"expected {kind.__name__ if isinstance(kind, type) else kind}")
    return val


def _merge(defaults, given, where):
    if given is None:
        given = {}
    if not isinstance(given, dict):
        raise ConfigError(where, "expected an object")
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigError(where, f"unknown field(s) {sorted(unknown)}")
    out = copy.deepcopy(defaults)
    out.update(copy.deepcopy(given))
    return out


def _normalize_fixed(fixed, where):
    if not isinstance(fixed, dict):
        raise ConfigError(where, "expected an object mapping parameter index to value")
    try:
        return {str(int(k)): float(v) for k, v in fixed.items()}
    except (TypeError, ValueError):
        raise ConfigError(where, "keys must be integer indices and values numbers") from None


def _normalize_ansatz(spec, where):
    if isinstance(spec, str):
        spec = {"variant": spec}
    if not isinstance(spec, dict):
        raise ConfigError(where, "expected an object with a 'variant' field")
    variant = _require(spec, "variant", where, str)
    if variant not in ANSATZ_VARIANTS:
        raise ConfigError(f"{where}.variant", f"unknown variant {variant!r}; one of {ANSATZ_VARIANTS}")
    out = {"variant": variant}
    allowed = {"variant"}
    if variant in ("sud_gate", "poe", "cayley"):
        allowed |= {"generators"}
        out["generators"] = spec.get("generators", "gellmann")
    if variant == "composite":
        allowed |= {"w", "v", "v_generators", "radius", "scaling", "certify"}
        out["w"] = _normalize_ansatz(spec.get("w", "generalized_euler"), f"{where}.w")
        out["v"] = spec.get("v", "sud_gate")
        if out["v"] not in ("sud_gate", "poe"):
            raise ConfigError(f"{where}.v", "V must be 'sud_gate' or 'poe'")
        out["v_generators"] = spec.get("v_generators", "gellmann")
        out["radius"] = spec.get("radius", "auto")
        out["scaling"] = spec.get("scaling", "ball")
        out["certify"] = bool(spec.get("certify", True))
    if variant == "arctan_squashed":
        allowed |= {"inner", "radius", "scaling"}
        out["inner"] = _normalize_ansatz(_require(spec, "inner", where), f"{where}.inner")
        out["radius"] = float(_require(spec, "radius", where))
        out["scaling"] = spec.get("scaling", "ball")
    if "radius" in out and out["radius"] != "auto":
        try:
            out["radius"] = float(out["radius"])
        except (TypeError, ValueError):
            raise ConfigError(f"{where}.radius", "expected a number or 'auto'") from None
        if not out["radius"] > 0:
            raise ConfigError(f"{where}.radius", "must be strictly positive")
    if out.get("scaling", "ball") not in ("ball", "box"):
        raise ConfigError(f"{where}.scaling", "expected 'ball' or 'box'")
    unknown = set(spec) - allowed
    if unknown:
        raise ConfigError(where, f"unknown field(s) {sorted(unknown)} for variant {variant!r}")
    return out


@dataclass
class ProblemConfig:
    kind: str = "vqe"
    dim: int = 2
    hamiltonian: dict = field(default_factory=dict)
    initial_state: object = "basis:0"
    ansatz: dict = field(default_factory=lambda: {"variant": "euler_xyx"})
    optimizer: dict = field(default_factory=lambda: dict(OPTIMIZER_DEFAULTS))
    theta0: list | None = None
    init: dict = field(default_factory=lambda: copy.deepcopy(INIT_DEFAULTS))
    sampling: dict = field(default_factory=lambda: copy.deepcopy(SAMPLING_DEFAULTS))
    output: dict = field(default_factory=lambda: dict(OUTPUT_DEFAULTS))
    name: str = ""

    @classmethod
    def from_dict(cls, raw):
        if not isinstance(raw, dict):
            raise ConfigError("config", "top level must be an object")
        known = {"kind", "dim", "hamiltonian", "initial_state", "ansatz", "optimizer",
                 "theta0", "init", "sampling", "output", "name"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError("config", f"unknown field(s) {sorted(unknown)}")
        kind = raw.get("kind", "vqe")
        if kind not in ("vqe", "u1_escape"):
            raise ConfigError("kind", f"expected 'vqe' or 'u1_escape', got {kind!r}")
        cfg = cls(kind=kind, name=str(raw.get("name", "")))
        cfg.optimizer = _merge(OPTIMIZER_DEFAULTS, raw.get("optimizer"), "optimizer")
        reg = cfg.optimizer["regularization"]
        if reg is not None:
            reg = _merge({"lambda": 0.0, "alpha": 2}, reg, "optimizer.regularization")
            cfg.optimizer["regularization"] = reg
        cfg.init = _merge(INIT_DEFAULTS, raw.get("init"), "init")
        cfg.init["fixed"] = _normalize_fixed(cfg.init["fixed"], "init.fixed")
        cfg.sampling = _merge(SAMPLING_DEFAULTS, raw.get("sampling"), "sampling")
        cfg.sampling["fixed"] = _normalize_fixed(cfg.sampling["fixed"], "sampling.fixed")
        smp = cfg.sampling
        if smp["distribution"] not in ("heavy", "gaussian", "uniform", "sphere"):
            raise ConfigError("sampling.distribution",
                              "expected 'heavy', 'gaussian', 'uniform' or 'sphere'")
        if smp["distribution"] == "sphere" and not (
                isinstance(smp["radius"], (int, float)) and smp["radius"] > 0):
            raise ConfigError("sampling.radius", "sphere sampling needs a positive radius")
        if not 0 <= smp["resonant_fraction"] <= 1:
            raise ConfigError("sampling.resonant_fraction", "expected a value in [0, 1]")
        if cfg.init["distribution"] not in ("gaussian", "uniform"):
            raise ConfigError("init.distribution", "expected 'gaussian' or 'uniform'")
        cfg.output = _merge(OUTPUT_DEFAULTS, raw.get("output"), "output")
        theta0 = raw.get("theta0")
        if theta0 is not None:
            try:
                theta0 = [float(x) for x in theta0]
            except (TypeError, ValueError):
                raise ConfigError("theta0", "expected a list of numbers") from None
        cfg.theta0 = theta0
        if kind == "u1_escape":
            cfg.dim = 1
            cfg.hamiltonian = {}
            cfg.initial_state = None
            cfg.ansatz = {"variant": "u1_escape"}
            if any(k in raw for k in ("hamiltonian", "ansatz", "initial_state")):
                raise ConfigError("config", "u1_escape problems take no hamiltonian/ansatz/state")
        else:
            dim = _require(raw, "dim", "config")
            if not isinstance(dim, int) or isinstance(dim, bool) or dim < 2:
                raise ConfigError("dim", "expected an integer >= 2")
            cfg.dim = dim
            cfg.hamiltonian = _normalize_hamiltonian(_require(raw, "hamiltonian", "config"), dim)
            cfg.initial_state = _normalize_state(raw.get("initial_state", "basis:0"), dim)
            cfg.ansatz = _normalize_ansatz(_require(raw, "ansatz", "config"), "ansatz")
        try:
            cfg.gd_config(gamma=1.0 if cfg.optimizer["gamma"] == "auto" else None)
        except (TypeError, ValueError) as exc:
            raise ConfigError("optimizer", str(exc)) from None
        return cfg

    def to_dict(self):
        out = {
            "name": self.name,
            "kind": self.kind,
            "optimizer": copy.deepcopy(self.optimizer),
            "theta0": self.theta0,
            "init": copy.deepcopy(self.init),
            "sampling": copy.deepcopy(self.sampling),
            "output": dict(self.output),
        }
        if self.kind == "vqe":
            out.update({
                "dim": self.dim,
                "hamiltonian": copy.deepcopy(self.hamiltonian),
                "initial_state": copy.deepcopy(self.initial_state),
                "ansatz": copy.deepcopy(self.ansatz),
            })
        return out

    def gd_config(self, gamma=None):
        opt = dict(self.optimizer)
        reg = opt.pop("regularization")
        opt["gamma"] = gamma if gamma is not None else opt["gamma"]
        if isinstance(opt["gamma"], str):
            raise ValueError("gamma 'auto' must be resolved before building GdConfig")
        return GdConfig(
            regularization=None if reg is None else Regularization(reg["lambda"], int(reg["alpha"])),
            **opt,
        )

    def init_distribution(self):
        i = self.init
        return InitDistribution(i["distribution"], i["sigma"], i["low"], i["high"],
                                {int(k): v for k, v in i["fixed"].items()})


def _normalize_hamiltonian(spec, dim):
    where = "hamiltonian"
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigError(where, "expected exactly one of 'dense', 'pauli', 'random_seed'")
    (key, val), = spec.items()
    if key == "dense":
        h = _complex_array(val, f"{where}.dense")
        if h.shape != (dim, dim):
            raise ConfigError(f"{where}.dense", f"expected a {dim}x{dim} matrix, got {h.shape}")
        if np.abs(h - h.conj().T).max() > 1e-10 * max(1.0, np.abs(h).max()):
            raise ConfigError(f"{where}.dense", "matrix is not Hermitian")
        return {"dense": complex_to_json(h)}
    if key == "pauli":
        n = int(round(np.log2(dim)))
        if 2**n != dim:
            raise ConfigError(f"{where}.pauli", f"Pauli strings need dim = 2^n, got {dim}")
        terms = []
        for i, term in enumerate(val):
            w = f"{where}.pauli[{i}]"
            if not isinstance(term, dict):
                raise ConfigError(w, "expected {'coeff': c, 'string': 'XZ'}")
            s = str(_require(term, "string", w)).upper()
            if len(s) != n or set(s) - set("IXYZ"):
                raise ConfigError(f"{w}.string", f"expected {n} letters from IXYZ, got {s!r}")
            coeff = term.get("coeff", 1.0)
            if not isinstance(coeff, (int, float)) or isinstance(coeff, bool):
                raise ConfigError(f"{w}.coeff", "Hermitian Hamiltonians need real coefficients")
            terms.append({"coeff": float(coeff), "string": s})
        return {"pauli": terms}
    if key == "random_seed":
        if not isinstance(val, int) or isinstance(val, bool):
            raise ConfigError(f"{where}.random_seed", "expected an integer")
        return {"random_seed": val}
    raise ConfigError(where, f"unknown Hamiltonian form {key!r}")


def _normalize_state(spec, dim):
    where = "initial_state"
    if isinstance(spec, str):
        if not spec.startswith("basis:"):
            raise ConfigError(where, "expected 'basis:k' or a list of [re, im] amplitudes")
        try:
            k = int(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigError(where, f"bad basis index in {spec!r}") from None
        if not 0 <= k < dim:
            raise ConfigError(where, f"basis index {k} out of range for dim {dim}")
        return f"basis:{k}"
    v = _complex_array(spec, where)
    if v.shape != (dim,):
        raise ConfigError(where, f"expected {dim} amplitudes, got shape {v.shape}")
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ConfigError(where, "state vector is zero")
    return complex_to_json(v / norm)


def build_hamiltonian(cfg):
    spec = cfg.hamiltonian
    if "dense" in spec:
        return _complex_array(spec["dense"], "hamiltonian.dense")
    if "pauli" in spec:
        h = np.zeros((cfg.dim, cfg.dim), dtype=complex)
        for t in spec["pauli"]:
            h += t["coeff"] * pauli_string(t["string"])
        return h
    return seeded_random_hermitian(cfg.dim, spec["random_seed"])


def build_state(cfg):
    s = cfg.initial_state
    if isinstance(s, str):
        v = np.zeros(cfg.dim, dtype=complex)
        v[int(s.split(":")[1])] = 1
        return v
    v = _complex_array(s, "initial_state")
    return v / np.linalg.norm(v)


def resolve_generators(spec, dim, algebra="su"):
    if spec == "gellmann":
        return gellmann_basis(dim) if algebra == "su" else unitary_algebra_basis(dim)
    if spec == "pauli":
        gens = az.pauli_generators(dim=dim)
        if algebra == "u":
            gens = np.concatenate([gens, -1j * np.eye(dim)[None]])
        return gens
    if isinstance(spec, list):
        return az.pauli_generators(labels=[str(s).upper() for s in spec])
    raise ConfigError("ansatz.generators", f"unknown generator set {spec!r}")


def build_ansatz(spec, dim):
    v = spec["variant"]
    if v == "sud_gate":
        return az.SUdGate(resolve_generators(spec["generators"], dim))
    if v == "poe":
        return az.ProductOfExponentials(resolve_generators(spec["generators"], dim))
    if v == "euler_xyx":
        if dim != 2:
            raise ConfigError("ansatz", "euler_xyx needs dim = 2")
        return az.euler_xyx()
    if v == "generalized_euler":
        return az.generalized_euler(dim)
    if v == "cayley":
        return az.Cayley(resolve_generators(spec["generators"], dim, algebra="u"))
    if v == "composite":
        w = build_ansatz(spec["w"], dim)
        basis = resolve_generators(spec["v_generators"], dim)
        try:
            return az.make_composite(w, spec["v"], basis, spec["radius"], spec["scaling"],
                                     certify=spec["certify"])
        except ValueError as exc:
            raise ConfigError("ansatz.radius", str(exc)) from None
    if v == "arctan_squashed":
        return az.ArctanSquashed(build_ansatz(spec["inner"], dim), spec["radius"], spec["scaling"])
    raise ConfigError("ansatz.variant", f"unknown variant {v!r}")


def build_problem(cfg):
    if cfg.kind == "u1_escape":
        return U1EscapeProblem()
    try:
        return LandscapeProblem(build_hamiltonian(cfg), build_state(cfg),
                                build_ansatz(cfg.ansatz, cfg.dim))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("config", str(exc)) from None


def bundled_configs():
    root = resources.files("vqeconv") / "configs"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def load_config(path):
    """Read a config file; bare names fall back to the bundled configs."""
    p = Path(path)
    if not p.exists():
        name = p.name if p.suffix == ".json" else p.name + ".json"
        bundled = resources.files("vqeconv") / "configs" / name
        if not bundled.is_file():
            raise ConfigError(str(path), "no such file (and no bundled config of that name)")
        text = bundled.read_text()
    else:
        text = p.read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    return ProblemConfig.from_dict(raw)
