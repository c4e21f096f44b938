"""Experiment configuration: schema, validation and unit handling.

Config files are YAML (JSON is accepted as a subset).  Quantities are given
in physical units with ``delta0`` as the detuning scale; engines run in
units of delta0 = 1 and results are converted back on output.
"""

import math
from typing import Annotated, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError

KINDS = ("coherence", "spectrum", "fwhm-sweep", "decay-sweep", "cutoff-sweep", "zeno-compare")
MC_KINDS = {"coherence", "decay-sweep", "cutoff-sweep", "zeno-compare"}

PosFloat = Annotated[float, Field(gt=0, allow_inf_nan=False)]
NonNegFloat = Annotated[float, Field(ge=0, allow_inf_nan=False)]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class StudentSpec(_Strict):
    family: Literal["student_t"]
    r: PosFloat
    delta_c: Optional[PosFloat] = None


class StableSpec(_Strict):
    family: Literal["stable"]
    alpha: Annotated[float, Field(gt=0, le=2)]
    c: PosFloat = 1.0
    delta_c: Optional[PosFloat] = None


DistSpec = Annotated[Union[StudentSpec, StableSpec], Field(discriminator="family")]


class ProcessSpec(_Strict):
    type: Literal["none", "poisson", "fixed"] = "none"
    rate: Optional[NonNegFloat] = None
    interval: Optional[PosFloat] = None

    @model_validator(mode="after")
    def _fields(self):
        if self.type == "poisson" and self.rate is None:
            raise ValueError("poisson process needs 'rate'")
        if self.type == "fixed" and self.interval is None:
            raise ValueError("fixed process needs 'interval'")
        return self


class LinGrid(_Strict):
    stop: PosFloat
    points: Annotated[int, Field(ge=2, le=1_000_000)] = 201


class LogLadder(_Strict):
    start: PosFloat
    stop: PosFloat
    points: Annotated[int, Field(ge=2, le=10_000)]

    @model_validator(mode="after")
    def _order(self):
        if self.stop <= self.start:
            raise ValueError("'stop' must exceed 'start'")
        return self


Ladder = Union[list[NonNegFloat], LogLadder]


class FreqGrid(_Strict):
    half_width: PosFloat
    points: Annotated[int, Field(ge=5, le=1_000_000)] = 2048


class Experiment(_Strict):
    kind: Literal[KINDS]
    name: Optional[str] = None
    distribution: DistSpec
    process: ProcessSpec = ProcessSpec()
    engine: Literal["monte_carlo", "analytic", "laplace"] = "monte_carlo"
    estimator: Literal["phase", "conditional"] = "phase"
    times: Optional[Union[LinGrid, list[NonNegFloat]]] = None
    frequencies: Optional[FreqGrid] = None
    gammas: Optional[Ladder] = None
    spectrum_gammas: list[NonNegFloat] = [0.0]
    cutoffs: Optional[list[PosFloat]] = None
    reference_T: PosFloat = 0.5
    interval: Optional[PosFloat] = None
    ensemble_size: Annotated[int, Field(ge=2)] = 10_000
    seed: Optional[Annotated[int, Field(ge=0, lt=2 ** 64)]] = None


class Document(_Strict):
    delta0: PosFloat = 1.0
    experiments: list[Experiment] = Field(min_length=1)


def _loc(loc):
    return ".".join(str(p) for p in loc if not (isinstance(p, str) and p in
                                                ("student_t", "stable", "LinGrid", "LogLadder")))


def _semantic(doc):
    """Kind-specific requirements that the schema cannot express."""
    errs = []
    names = set()
    for i, e in enumerate(doc.experiments):
        name = e.name or e.kind
        if name in names:
            errs.append((f"experiments.{i}.name", f"duplicate experiment name {name!r}"))
        names.add(name)
        errs += _check_experiment(e, f"experiments.{i}")
    return errs


def _check_experiment(e, p):
    """Requirements of one experiment; ``p`` is its field path."""
    errs = []
    need = []
    if e.kind in MC_KINDS and not (e.kind == "coherence" and e.engine != "monte_carlo"):
        need.append("seed")
    if e.kind in ("fwhm-sweep", "decay-sweep", "cutoff-sweep"):
        need.append("gammas")
    if e.kind == "cutoff-sweep":
        need.append("cutoffs")
    if e.kind == "zeno-compare":
        need += ["interval", "times"]
    if e.kind == "coherence" and e.engine == "laplace" and e.process.type == "fixed":
        errs.append((f"{p}.engine", "the Laplace engine handles Poisson resets only"))
    for f in need:
        if getattr(e, f) is None:
            errs.append((f"{p}.{f}", f"field required for kind {e.kind!r}"))
    if e.kind == "cutoff-sweep" and e.distribution.delta_c is not None:
        errs.append((f"{p}.distribution.delta_c", "cutoff-sweep takes its cutoffs from 'cutoffs'"))
    if e.kind == "cutoff-sweep" and e.distribution.family == "stable" and e.distribution.alpha not in (1.0, 2.0):
        errs.append((f"{p}.distribution.alpha", "truncated stable laws need alpha in {1, 2}"))
    if e.kind in ("decay-sweep", "cutoff-sweep", "fwhm-sweep") and isinstance(e.gammas, list):
        if len(e.gammas) < 2:
            errs.append((f"{p}.gammas", "a ladder needs at least 2 rates"))
    if isinstance(e.times, list):
        t = np.asarray(e.times, dtype=float)
        if e.kind == "zeno-compare":
            if np.any(t <= 0) or np.any(np.diff(t) <= 0):
                errs.append((f"{p}.times", "zeno times must be positive and increasing"))
        elif t.size < 2 or t[0] != 0 or np.any(np.diff(t) <= 0):
            errs.append((f"{p}.times", "time grid must start at 0 and increase"))
    return errs


def parse(text):
    """Parse config text into a validated :class:`Document`.

    A run manifest is accepted too; its ``resolved_config`` is used.
    Raises :class:`ConfigError` carrying every problem with its field path.
    """
    try:
        raw = yaml.safe_load(text) if text and text.strip() else None
    except yaml.YAMLError as exc:
        raise ConfigError([("", f"not valid YAML/JSON: {exc}")]) from None
    if raw is None:
        raise ConfigError([("", "empty configuration")])
    if not isinstance(raw, dict):
        raise ConfigError([("", "top level must be a mapping")])
    if "resolved_config" in raw:
        raw = raw["resolved_config"]
    elif "experiments" not in raw and "kind" in raw:
        # single-experiment shorthand
        raw = dict(raw)
        top = {k: raw.pop(k) for k in ("delta0",) if k in raw}
        raw = {**top, "experiments": [raw]}
    try:
        doc = Document.model_validate(raw)
    except ValidationError as exc:
        errs = [(_loc(e["loc"]), e["msg"]) for e in exc.errors()]
        # report kind-specific problems of the experiments that did parse as well
        exps = raw.get("experiments") if isinstance(raw, dict) else None
        for i, item in enumerate(exps if isinstance(exps, list) else []):
            try:
                errs += _check_experiment(Experiment.model_validate(item), f"experiments.{i}")
            except ValidationError:
                pass
        raise ConfigError(errs) from None
    errs = _semantic(doc)
    if errs:
        raise ConfigError(errs)
    return doc


def load(path):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def resolved(doc):
    """Plain-data form with every default filled in (re-parseable)."""
    out = doc.model_dump(mode="json")
    for e in out["experiments"]:
        e["name"] = e["name"] or e["kind"]
    return out


def with_seed(doc, seed):
    """Copy of ``doc`` with every experiment's seed replaced."""
    data = doc.model_dump()
    for e in data["experiments"]:
        e["seed"] = int(seed)
    return Document.model_validate(data)


def ladder(spec):
    if spec is None:
        return None
    if isinstance(spec, LogLadder):
        return np.logspace(math.log10(spec.start), math.log10(spec.stop), spec.points)
    return np.asarray(spec, dtype=float)
