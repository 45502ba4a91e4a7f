"""On-disk formats: CM documents, simulation configs and ensemble tables.

CM documents are JSON::

    {
      "schema_version": "1.0",
      "kind": "QUADRATURE" | "AMPLITUDE" | "TWO_MODE_PQ" | "XY_PAIR",
      "basis": "INTRACAVITY_XY",            # QUADRATURE only, optional
      "entries": {...},                     # kind-specific, see below
      "modes": [omega1, omega2],            # optional except for TWO_MODE_PQ
      "provenance": {"text": "...", "ensemble_digest": "...", "stderr": {...}}
    }

Entries: QUADRATURE and XY_PAIR use ``m_xx``, ``m_yy``, ``m_xy``;
AMPLITUDE uses ``m_abs`` and ``m_aa = {"re": .., "im": ..}``; TWO_MODE_PQ
uses ``block_1``/``block_2`` (each like QUADRATURE) and a 2x2 ``cross``.
Floats are written with Python's shortest round-trip repr (at most 17
significant digits), so ``load_cm(save_cm(doc))`` is exact.

Simulation configs are JSON::

    {"seed": 42, "n_samples": 1000000,
     "solo":  {"0": {"a": 1, "b": 1, "c": 0}},
     "pairs": {"3": {"a": 0.8, "b": 0.8, "c": 0}}}

Ensemble tables have one row per (bin, sample): ``bin,sample_index,q,p``,
preceded by ``#``-prefixed metadata lines (seed, n_samples, digest).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .core import AmplitudeCM, Basis, GaussianParams, QuadratureCM
from .errors import ConfigInvalid, InvariantViolation, ParseError
from .homodyne import FieldEnsemble, SpectrumConfig
from .multimode import TwoModeCM, TwoModeGaussianParams, XYPairCM

SCHEMA_VERSION = "1.0"


class Kind(enum.Enum):
    QUADRATURE = "QUADRATURE"
    AMPLITUDE = "AMPLITUDE"
    TWO_MODE_PQ = "TWO_MODE_PQ"
    XY_PAIR = "XY_PAIR"


_NUM = {"type": "number"}
_QUAD = {
    "type": "object",
    "properties": {"m_xx": _NUM, "m_yy": _NUM, "m_xy": _NUM},
    "required": ["m_xx", "m_yy", "m_xy"],
    "additionalProperties": False,
}
_ENTRIES = {
    "QUADRATURE": _QUAD,
    "XY_PAIR": _QUAD,
    "AMPLITUDE": {
        "type": "object",
        "properties": {
            "m_abs": _NUM,
            "m_aa": {"type": "object", "properties": {"re": _NUM, "im": _NUM},
                     "required": ["re", "im"], "additionalProperties": False},
        },
        "required": ["m_abs", "m_aa"],
        "additionalProperties": False,
    },
    "TWO_MODE_PQ": {
        "type": "object",
        "properties": {
            "block_1": _QUAD,
            "block_2": _QUAD,
            "cross": {"type": "array", "minItems": 2, "maxItems": 2,
                      "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": _NUM}},
        },
        "required": ["block_1", "block_2", "cross"],
        "additionalProperties": False,
    },
}
DOCUMENT_SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"type": "string"},
        "kind": {"enum": [k.value for k in Kind]},
        "basis": {"enum": [b.value for b in Basis]},
        "entries": {"type": "object"},
        "modes": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
        "provenance": {"type": "object"},
    },
    "required": ["schema_version", "kind", "entries"],
    "additionalProperties": False,
}

_PARAMS = {
    "type": "object",
    "properties": {"a": _NUM, "b": _NUM, "c": _NUM},
    "required": ["a", "b", "c"],
}
CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "n_samples": {"type": "integer", "minimum": 1},
        "solo": {"type": "object", "additionalProperties": {
            **_PARAMS,
            "properties": {**_PARAMS["properties"], "mean_x": _NUM, "mean_y": _NUM},
            "additionalProperties": False,
        }},
        "pairs": {"type": "object",
                  "additionalProperties": {**_PARAMS, "additionalProperties": False}},
    },
    "required": ["seed", "n_samples"],
    "additionalProperties": False,
}


@dataclass
class CMDocument:
    kind: Kind
    entries: dict
    modes: tuple[int, int] | None = None
    provenance: dict = field(default_factory=dict)
    basis: Basis | None = None
    schema_version: str = SCHEMA_VERSION

    def to_json(self) -> dict:
        out = {"schema_version": self.schema_version, "kind": self.kind.value}
        if self.basis is not None:
            out["basis"] = self.basis.value
        out["entries"] = self.entries
        if self.modes is not None:
            out["modes"] = list(self.modes)
        if self.provenance:
            out["provenance"] = self.provenance
        return out

    def to_object(self):
        """The in-memory CM this document describes."""
        e = self.entries
        if self.kind is Kind.QUADRATURE:
            return QuadratureCM(e["m_xx"], e["m_yy"], e["m_xy"],
                                self.basis or Basis.INTRACAVITY_XY)
        if self.kind is Kind.AMPLITUDE:
            return AmplitudeCM(e["m_abs"], complex(e["m_aa"]["re"], e["m_aa"]["im"]))
        if self.kind is Kind.XY_PAIR:
            return XYPairCM(e["m_xx"], e["m_yy"], e["m_xy"],
                            self.modes[0] if self.modes else 1)
        b1, b2 = e["block_1"], e["block_2"]
        return TwoModeCM(
            QuadratureCM(b1["m_xx"], b1["m_yy"], b1["m_xy"], Basis.SPECTRAL_PQ),
            QuadratureCM(b2["m_xx"], b2["m_yy"], b2["m_xy"], Basis.SPECTRAL_PQ),
            np.array(e["cross"], dtype=float), tuple(self.modes))

    @classmethod
    def from_object(cls, obj, modes=None, provenance=None) -> "CMDocument":
        prov = dict(provenance or {})
        if isinstance(obj, QuadratureCM):
            return cls(Kind.QUADRATURE, _quad(obj), _modes(modes), prov, obj.basis)
        if isinstance(obj, AmplitudeCM):
            return cls(Kind.AMPLITUDE, {"m_abs": obj.m_abs,
                                        "m_aa": {"re": obj.m_aa.real, "im": obj.m_aa.imag}},
                       _modes(modes), prov)
        if isinstance(obj, XYPairCM):
            return cls(Kind.XY_PAIR, _quad(obj), _modes(modes) or obj.mode_pair, prov)
        if isinstance(obj, TwoModeCM):
            return cls(Kind.TWO_MODE_PQ,
                       {"block_1": _quad(obj.block_1), "block_2": _quad(obj.block_2),
                        "cross": [[float(v) for v in row] for row in obj.cross]},
                       _modes(modes) or obj.modes, prov)
        raise TypeError(f"no document kind for {type(obj).__name__}")


def _quad(cm) -> dict:
    return {"m_xx": cm.m_xx, "m_yy": cm.m_yy, "m_xy": cm.m_xy}


def _modes(modes):
    return None if modes is None else (int(modes[0]), int(modes[1]))


def _field_path(err: jsonschema.ValidationError) -> str:
    return ".".join(str(p) for p in err.absolute_path) or "<document>"


def _violations(doc: CMDocument) -> list[str]:
    e = doc.entries
    if doc.kind in (Kind.QUADRATURE, Kind.XY_PAIR):
        out = QuadratureCM(e["m_xx"], e["m_yy"], e["m_xy"]).violations()
        if doc.kind is Kind.XY_PAIR and doc.modes and doc.modes[1] != -doc.modes[0]:
            out.append("modes[1] == -modes[0]")
        return out
    if doc.kind is Kind.AMPLITUDE:
        return doc.to_object().violations()
    out = []
    if doc.modes is None:
        return ["modes present"]
    for name in ("block_1", "block_2"):
        b = e[name]
        out += [f"{name}.{v}" for v in QuadratureCM(b["m_xx"], b["m_yy"], b["m_xy"]).violations()]
    if out:
        return out
    cm = doc.to_object()
    if not cm.is_opposite_pair and np.any(cm.cross != 0):
        out.append("cross == 0 unless modes[1] == -modes[0]")
    try:
        np.linalg.cholesky(cm.matrix)
    except np.linalg.LinAlgError:
        out.append("4x4 CM positive definite")
    return out


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def parse_cm(text: str, source: str = "<string>") -> CMDocument:
    try:
        raw = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    except ValueError as exc:
        raise ParseError(f"{source}: {exc}") from None
    try:
        jsonschema.validate(raw, DOCUMENT_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ParseError(f"{source}: field {_field_path(exc)}: {exc.message}") from None
    try:
        jsonschema.validate(raw["entries"], _ENTRIES[raw["kind"]])
    except jsonschema.ValidationError as exc:
        where = ".".join(["entries", *map(str, exc.absolute_path)])
        raise ParseError(f"{source}: field {where}: {exc.message}") from None
    if raw["schema_version"].split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise ParseError(f"{source}: field schema_version: unsupported version "
                         f"{raw['schema_version']!r} (expected {SCHEMA_VERSION})")
    doc = CMDocument(
        Kind(raw["kind"]), raw["entries"],
        _modes(raw["modes"]) if "modes" in raw else None,
        raw.get("provenance", {}),
        Basis(raw["basis"]) if "basis" in raw else None,
        raw["schema_version"])
    bad = _violations(doc)
    if bad:
        raise InvariantViolation(bad[0] if len(bad) == 1 else "; ".join(bad))
    return doc


def load_cm(path) -> CMDocument:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    return parse_cm(text, str(path))


def dump_cm(doc: CMDocument) -> str:
    return json.dumps(doc.to_json(), indent=2) + "\n"


def save_cm(doc: CMDocument, path) -> None:
    Path(path).write_text(dump_cm(doc))


def parse_config(raw: dict, source: str = "<config>") -> SpectrumConfig:
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigInvalid(f"{source}: field {_field_path(exc)}: {exc.message}") from None

    def bins(section):
        out = {}
        for key, value in raw.get(section, {}).items():
            try:
                omega = int(key)
            except ValueError:
                raise ConfigInvalid(f"{source}: field {section}.{key}: bin keys must be integers") from None
            out[omega] = value
        return out

    solo = {k: GaussianParams(v["a"], v["b"], v["c"], v.get("mean_x", 0.0), v.get("mean_y", 0.0))
            for k, v in bins("solo").items()}
    pairs = {k: TwoModeGaussianParams(v["a"], v["b"], v["c"]) for k, v in bins("pairs").items()}
    try:
        return SpectrumConfig(pairs, solo, raw["seed"], raw["n_samples"])
    except ConfigInvalid as exc:
        raise ConfigInvalid(f"{source}: {exc}") from None


def load_config(path) -> SpectrumConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigInvalid(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_config(raw, str(path))


ENSEMBLE_HEADER = "bin,sample_index,q,p"


def ensemble_table(ens: FieldEnsemble) -> np.ndarray:
    """Rows ``(bin, sample_index, q, p)`` ordered by bin then sample."""
    rows = []
    idx = np.arange(ens.n_samples, dtype=float)
    for omega in ens.bins:
        qp = ens.samples[omega]
        rows.append(np.column_stack([np.full(ens.n_samples, float(omega)), idx, qp]))
    return np.vstack(rows)


def write_ensemble(ens: FieldEnsemble, path, fmt: str = "csv") -> Path:
    path = Path(path)
    table = ensemble_table(ens)
    if fmt == "npz":
        np.savez(path, bin=table[:, 0].astype(np.int64), sample_index=table[:, 1].astype(np.int64),
                 q=table[:, 2], p=table[:, 3], seed=np.uint64(ens.seed),
                 n_samples=ens.n_samples, digest=ens.digest,
                 pairs=np.array(sorted(ens.pairs), dtype=np.int64))
        return path
    if fmt != "csv":
        raise ValueError(f"unknown ensemble format {fmt!r}")
    meta = (f"# seed={ens.seed}\n# n_samples={ens.n_samples}\n# digest={ens.digest}\n"
            f"# pairs={','.join(str(p) for p in sorted(ens.pairs))}\n")
    with open(path, "w") as fh:
        fh.write(meta)
        np.savetxt(fh, table, fmt=["%d", "%d", "%.17g", "%.17g"], delimiter=",",
                   header=ENSEMBLE_HEADER, comments="")
    return path


def read_ensemble(path) -> FieldEnsemble:
    path = Path(path)
    if path.suffix == ".npz":
        with np.load(path) as z:
            bins_, q, p = z["bin"], z["q"], z["p"]
            seed, n, digest = int(z["seed"]), int(z["n_samples"]), str(z["digest"])
            pairs = frozenset(int(v) for v in z["pairs"])
    else:
        meta, n_meta = {}, 0
        with open(path) as fh:
            for line in fh:
                if not line.startswith("#"):
                    break
                n_meta += 1
                key, _, value = line[1:].strip().partition("=")
                meta[key] = value
        # loadtxt counts comment lines in skiprows; skip metadata plus the header
        data = np.loadtxt(path, delimiter=",", comments=None, skiprows=n_meta + 1, ndmin=2)
        bins_, q, p = data[:, 0].astype(int), data[:, 2], data[:, 3]
        seed, n, digest = int(meta["seed"]), int(meta["n_samples"]), meta["digest"]
        pairs = frozenset(int(v) for v in meta.get("pairs", "").split(",") if v)
    samples = {}
    for omega in np.unique(bins_):
        mask = bins_ == omega
        arr = np.column_stack([q[mask], p[mask]])
        arr.flags.writeable = False
        samples[int(omega)] = arr
    return FieldEnsemble(samples, seed, n, digest, pairs)
