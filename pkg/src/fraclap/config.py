"""Run-configuration parsing and validation.

Configs are strict JSON: unknown keys are rejected and every violation is
reported with a JSON-pointer path.  A parsed RunConfig is a plain
dataclass tree; ``normalized`` re-serializes it with all defaults
materialized, so parse/serialize round trips are stable and the config
digest (sha256 of the canonical form, output directory excluded) is a
reliable identity for reproducibility checks.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import jsonschema


class ConfigError(ValueError):
    def __init__(self, pointer: str, message: str):
        self.pointer = pointer or "/"
        super().__init__(f"{self.pointer}: {message}")


_NUMBER = {"type": "number"}

DOMAIN_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["box", "polygon2d"]},
        "lengths": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "number", "exclusiveMinimum": 0},
        },
        "nodes_per_axis": {"type": "integer", "minimum": 1},
        "vertices": {
            "type": "array",
            "minItems": 3,
            "items": {
                "type": "array",
                "minItems": 2,
                "maxItems": 2,
                "items": _NUMBER,
            },
        },
        "h": {"type": "number", "exclusiveMinimum": 0},
    },
}

GROWTH_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["a", "b", "c", "d", "A", "B", "C"],
    "properties": {k: _NUMBER for k in ("a", "b", "c", "d", "A", "B", "C")},
}

TOP_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["domain", "problem"],
    "properties": {
        "domain": DOMAIN_SCHEMA,
        "basis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "source": {"enum": ["analytic", "discrete"]},
                "J": {"type": "integer", "minimum": 1},
            },
        },
        "w": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "minItems": 2,
                "maxItems": 2,
                "items": _NUMBER,
            },
        },
        "problem": {"type": "object"},
        "output": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
    },
}

PROBLEM_SCHEMAS = {
    "eig": {
        "type": "object",
        "additionalProperties": False,
        "required": ["kind"],
        "properties": {"kind": {"const": "eig"}},
    },
    "linear": {
        "type": "object",
        "additionalProperties": False,
        "required": ["kind", "g"],
        "properties": {
            "kind": {"const": "linear"},
            "g": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "coeffs": {"type": "array", "minItems": 1, "items": _NUMBER},
                    "samples_csv": {"type": "string"},
                },
            },
            "test_count": {"type": "integer", "minimum": 1},
        },
    },
    "nonlinear": {
        "type": "object",
        "additionalProperties": False,
        "required": ["kind", "nonlinearity"],
        "properties": {
            "kind": {"const": "nonlinear"},
            "nonlinearity": {
                "type": "object",
                "additionalProperties": False,
                "required": ["type"],
                "properties": {
                    "type": {"enum": ["builtin", "polynomial"]},
                    "A": _NUMBER,
                    "b": _NUMBER,
                    "terms": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["power"],
                            "properties": {
                                "power": {"type": "integer", "minimum": 0},
                                "coeff": _NUMBER,
                                "coeff_csv": {"type": "string"},
                            },
                        },
                    },
                    "growth": GROWTH_SCHEMA,
                },
            },
            "optimizer": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "gtol": {"type": ["number", "null"], "exclusiveMinimum": 0},
                    "max_iters": {"type": "integer", "minimum": 1},
                    "multistart": {"type": "integer", "minimum": 1},
                    "start_scale": {"type": "number", "exclusiveMinimum": 0},
                    "allow_noncoercive": {"type": "boolean"},
                },
            },
        },
    },
    "verify": {
        "type": "object",
        "additionalProperties": False,
        "required": ["kind"],
        "properties": {"kind": {"const": "verify"}},
    },
    "convergence": {
        "type": "object",
        "additionalProperties": False,
        "required": ["kind", "spacings"],
        "properties": {
            "kind": {"const": "convergence"},
            "spacings": {
                "type": "array",
                "minItems": 3,
                "items": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    lengths: tuple[float, ...] | None = None
    nodes_per_axis: int = 64
    vertices: tuple[tuple[float, float], ...] | None = None
    h: float | None = None


@dataclass(frozen=True)
class BasisSpec:
    source: str
    J: int


@dataclass(frozen=True)
class GSpec:
    coeffs: tuple[float, ...] | None = None
    samples_csv: str | None = None


@dataclass(frozen=True)
class LinearSpec:
    kind = "linear"
    g: GSpec = field(default_factory=GSpec)
    test_count: int | None = None


@dataclass(frozen=True)
class EigSpec:
    kind = "eig"


@dataclass(frozen=True)
class VerifySpec:
    kind = "verify"


@dataclass(frozen=True)
class ConvergenceSpec:
    kind = "convergence"
    spacings: tuple[float, ...] = ()


@dataclass(frozen=True)
class PolynomialTermSpec:
    power: int
    coeff: float | None = None
    coeff_csv: str | None = None


@dataclass(frozen=True)
class NonlinearitySpec:
    type: str
    A: float | None = None
    b: float | None = None
    terms: tuple[PolynomialTermSpec, ...] | None = None
    growth: dict | None = None


@dataclass(frozen=True)
class OptimizerSpec:
    gtol: float | None = None
    max_iters: int = 10000
    multistart: int = 1
    start_scale: float = 1.0
    allow_noncoercive: bool = False


@dataclass(frozen=True)
class NonlinearSpec:
    kind = "nonlinear"
    nonlinearity: NonlinearitySpec = None
    optimizer: OptimizerSpec = field(default_factory=OptimizerSpec)


@dataclass(frozen=True)
class RunConfig:
    domain: DomainSpec
    basis: BasisSpec
    w_terms: tuple[tuple[float, float], ...]
    problem: object
    output: str | None
    seed: int

    @property
    def problem_kind(self) -> str:
        return self.problem.kind


def _schema_errors(schema, doc, prefix=""):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc),
                    key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        e = errors[0]
        pointer = prefix + "".join(f"/{p}" for p in e.absolute_path)
        raise ConfigError(pointer, e.message)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a UTF-8 JSON run configuration."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("/", f"invalid JSON: {exc}") from exc
    return parse_config_dict(doc)


def parse_config_dict(doc) -> RunConfig:
    _schema_errors(TOP_SCHEMA, doc)

    dom = doc["domain"]
    if dom["kind"] == "box":
        if "lengths" not in dom:
            raise ConfigError("/domain", "box domain requires 'lengths'")
        for key in ("vertices", "h"):
            if key in dom:
                raise ConfigError(f"/domain/{key}",
                                  f"'{key}' is not a box-domain field")
        domain = DomainSpec(kind="box",
                            lengths=tuple(float(x) for x in dom["lengths"]),
                            nodes_per_axis=int(dom.get("nodes_per_axis", 64)))
    else:
        for key in ("lengths", "nodes_per_axis"):
            if key in dom:
                raise ConfigError(f"/domain/{key}",
                                  f"'{key}' is not a polygon-domain field")
        if "vertices" not in dom or "h" not in dom:
            raise ConfigError("/domain",
                              "polygon2d domain requires 'vertices' and 'h'")
        domain = DomainSpec(
            kind="polygon2d",
            vertices=tuple((float(x), float(y)) for x, y in dom["vertices"]),
            h=float(dom["h"]),
        )

    basis_doc = doc.get("basis", {})
    source = basis_doc.get("source",
                           "analytic" if domain.kind == "box" else "discrete")
    if source == "analytic" and domain.kind != "box":
        raise ConfigError("/basis/source",
                          "analytic basis is only available on box domains")
    basis = BasisSpec(source=source, J=int(basis_doc.get("J", 16)))

    w_doc = doc.get("w", [[1.0, 0.5]])
    w_terms = tuple((float(a), float(b)) for a, b in w_doc)
    for i, (a, _) in enumerate(w_terms):
        if a <= 0:
            raise ConfigError(f"/w/{i}/0", "coefficient alpha must be positive")
    betas = [b for _, b in w_terms]
    if betas[0] < 0 or any(b1 >= b2 for b1, b2 in zip(betas, betas[1:])):
        raise ConfigError(
            "/w",
            "beta exponents must satisfy 0 <= beta_0 < beta_1 < ... < beta_k "
            "(strictly increasing, nonnegative)",
        )

    prob_doc = doc["problem"]
    kind = prob_doc.get("kind")
    if kind not in PROBLEM_SCHEMAS:
        raise ConfigError("/problem/kind",
                          f"expected one of {sorted(PROBLEM_SCHEMAS)}, got {kind!r}")
    _schema_errors(PROBLEM_SCHEMAS[kind], prob_doc, prefix="/problem")
    problem = _parse_problem(kind, prob_doc)

    return RunConfig(
        domain=domain,
        basis=basis,
        w_terms=w_terms,
        problem=problem,
        output=doc.get("output"),
        seed=int(doc.get("seed", 0)),
    )


def _parse_problem(kind: str, doc: dict):
    if kind == "eig":
        return EigSpec()
    if kind == "verify":
        return VerifySpec()
    if kind == "convergence":
        spacings = tuple(float(h) for h in doc["spacings"])
        if len(set(spacings)) != len(spacings):
            raise ConfigError("/problem/spacings", "spacings must be distinct")
        return ConvergenceSpec(spacings=spacings)
    if kind == "linear":
        g = doc["g"]
        if ("coeffs" in g) == ("samples_csv" in g):
            raise ConfigError("/problem/g",
                              "exactly one of 'coeffs' or 'samples_csv' required")
        gspec = GSpec(
            coeffs=tuple(float(x) for x in g["coeffs"]) if "coeffs" in g else None,
            samples_csv=g.get("samples_csv"),
        )
        tc = doc.get("test_count")
        return LinearSpec(g=gspec, test_count=int(tc) if tc is not None else None)
    # nonlinear
    nl = doc["nonlinearity"]
    if nl["type"] == "builtin":
        if "A" not in nl or "b" not in nl:
            raise ConfigError("/problem/nonlinearity",
                              "builtin nonlinearity requires 'A' and 'b'")
        if "terms" in nl:
            raise ConfigError("/problem/nonlinearity/terms",
                              "'terms' is a polynomial-nonlinearity field")
        spec = NonlinearitySpec(type="builtin", A=float(nl["A"]), b=float(nl["b"]),
                                growth=nl.get("growth"))
    else:
        if "terms" not in nl:
            raise ConfigError("/problem/nonlinearity",
                              "polynomial nonlinearity requires 'terms'")
        for key in ("A", "b"):
            if key in nl:
                raise ConfigError(f"/problem/nonlinearity/{key}",
                                  f"'{key}' is a builtin-nonlinearity field")
        terms = []
        for i, t in enumerate(nl["terms"]):
            if ("coeff" in t) == ("coeff_csv" in t):
                raise ConfigError(
                    f"/problem/nonlinearity/terms/{i}",
                    "exactly one of 'coeff' or 'coeff_csv' required")
            terms.append(PolynomialTermSpec(
                power=int(t["power"]),
                coeff=float(t["coeff"]) if "coeff" in t else None,
                coeff_csv=t.get("coeff_csv"),
            ))
        spec = NonlinearitySpec(type="polynomial", terms=tuple(terms),
                                growth=nl.get("growth"))
    opt_doc = doc.get("optimizer", {})
    optimizer = OptimizerSpec(
        gtol=opt_doc.get("gtol"),
        max_iters=int(opt_doc.get("max_iters", 10000)),
        multistart=int(opt_doc.get("multistart", 1)),
        start_scale=float(opt_doc.get("start_scale", 1.0)),
        allow_noncoercive=bool(opt_doc.get("allow_noncoercive", False)),
    )
    return NonlinearSpec(nonlinearity=spec, optimizer=optimizer)


def normalized(config: RunConfig) -> dict:
    """Canonical JSON-ready dict with all defaults materialized."""
    dom: dict = {"kind": config.domain.kind}
    if config.domain.kind == "box":
        dom["lengths"] = list(config.domain.lengths)
        dom["nodes_per_axis"] = config.domain.nodes_per_axis
    else:
        dom["vertices"] = [list(v) for v in config.domain.vertices]
        dom["h"] = config.domain.h

    prob: dict = {"kind": config.problem_kind}
    p = config.problem
    if isinstance(p, ConvergenceSpec):
        prob["spacings"] = list(p.spacings)
    elif isinstance(p, LinearSpec):
        g: dict = {}
        if p.g.coeffs is not None:
            g["coeffs"] = list(p.g.coeffs)
        else:
            g["samples_csv"] = p.g.samples_csv
        prob["g"] = g
        if p.test_count is not None:
            prob["test_count"] = p.test_count
    elif isinstance(p, NonlinearSpec):
        nl: dict = {"type": p.nonlinearity.type}
        if p.nonlinearity.type == "builtin":
            nl["A"] = p.nonlinearity.A
            nl["b"] = p.nonlinearity.b
        else:
            nl["terms"] = [
                {"power": t.power, **({"coeff": t.coeff} if t.coeff is not None
                                      else {"coeff_csv": t.coeff_csv})}
                for t in p.nonlinearity.terms
            ]
        if p.nonlinearity.growth is not None:
            nl["growth"] = dict(p.nonlinearity.growth)
        prob["nonlinearity"] = nl
        prob["optimizer"] = {
            "gtol": p.optimizer.gtol,
            "max_iters": p.optimizer.max_iters,
            "multistart": p.optimizer.multistart,
            "start_scale": p.optimizer.start_scale,
            "allow_noncoercive": p.optimizer.allow_noncoercive,
        }

    out = {
        "domain": dom,
        "basis": {"source": config.basis.source, "J": config.basis.J},
        "w": [list(t) for t in config.w_terms],
        "problem": prob,
        "seed": config.seed,
    }
    if config.output is not None:
        out["output"] = config.output
    return out


def serialize(config: RunConfig) -> str:
    return json.dumps(normalized(config), sort_keys=True, indent=2) + "\n"


def config_digest(config: RunConfig) -> str:
    """sha256 of the canonical config, output location excluded."""
    doc = normalized(config)
    doc.pop("output", None)
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
