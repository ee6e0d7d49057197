"""Scenario files: loading, checking and evaluating a full analysis.

A scenario is a JSON document (see ``docs/scenario-format.md``) naming the
name tables, family, identifications, pedigrees, marker data, network model
and hypothesis settings of one analysis.  Relative file references resolve
against the scenario's directory first and the package directory second, so
bundled scenarios can refer to ``data/...`` tables.
"""

from __future__ import annotations

import copy
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import evidence as ev
from .diagnostics import Diagnostic, has_errors
from .lr import INFINITE, UNDEFINED, inverse, likelihood_ratio, lr_state, lr_to_json
from .oobn import OOBNParseError, flatten, parse, validate
from .onomasticon import (
    ClampedCountsWarning,
    DirichletPrior,
    FamilyConfiguration,
    IdentificationAssumption,
    ImpossibleConfigurationWarning,
    Member,
    NameModel,
    NamingConstraints,
    family_likelihood_alt,
    family_likelihood_alt_mixture,
    family_likelihood_null,
    mix_tables,
    read_name_table,
    validate_table,
)
from .pedigree import (
    DnaObservation,
    HaplotypePopulation,
    MutationModel,
    dna_lr,
    log_dna_likelihood,
    most_probable_pedigree,
    read_pedigree,
    validate_pedigree,
)

PACKAGE_DIR = Path(__file__).parent
SCHEMA = "kinship-lr/report/1"
TOP_LEVEL_KEYS = {
    "name", "description", "hypotheses", "conditionally_independent", "onomasticon", "dna",
    "pedigrees", "network", "direct", "selection", "sweep",
}
DISCONFIRMATION_NOTE = (
    "null likelihood is zero: the data exclude the hypothesised pedigree. Marker data can "
    "rule a pedigree out; a match alone cannot establish it."
)


class ScenarioError(Exception):
    """Scenario problems with located diagnostics and a CLI exit code (1 or 2)."""

    def __init__(self, exit_code: int, problems: list[tuple[str, Diagnostic]]):
        self.exit_code = exit_code
        self.problems = problems
        super().__init__("; ".join(d.format(f) for f, d in problems))


def _fail(exit_code: int, filename: str, code: str, message: str, line: int = 1, col: int = 1):
    raise ScenarioError(exit_code, [(filename, Diagnostic(line, col, code, message))])


def resolve_path(ref: str | Path, base_dir: Path) -> Path:
    """Relative paths try the scenario directory, then the package directory."""
    ref = Path(ref)
    if ref.is_absolute():
        return ref
    for root in (base_dir, PACKAGE_DIR):
        cand = root / ref
        if cand.exists():
            return cand
    return base_dir / ref


def resolve_scenario_path(path: str | Path) -> Path:
    """A scenario path as given, or else the bundled file of that relative name."""
    path = Path(path)
    if path.exists() or path.is_absolute():
        return path
    bundled = PACKAGE_DIR / path
    return bundled if bundled.exists() else path


@dataclass
class LoadedScenario:
    raw: dict
    path: Path

    @property
    def base_dir(self) -> Path:
        return self.path.parent

    @property
    def name(self) -> str:
        return str(self.raw.get("name", self.path.stem))


def load_scenario(path: str | Path) -> LoadedScenario:
    path = resolve_scenario_path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        _fail(2, str(path), "S_IO", f"cannot read scenario: {exc.strerror or exc}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        _fail(2, str(path), "S_PARSE", exc.msg, exc.lineno, exc.colno)
    if not isinstance(raw, dict):
        _fail(1, str(path), "S_SCHEMA", "scenario must be a JSON object")
    return LoadedScenario(raw, path)


# --------------------------------------------------------------------------
# compilation: raw dict -> checked objects


@dataclass
class CompiledScenario:
    name: str
    raw: dict
    hypotheses: ev.HypothesisPair
    conditionally_independent: bool = True
    onomasticon: dict | None = None
    dna: list[dict] = field(default_factory=list)
    pedigrees: dict | None = None
    network: dict | None = None
    direct: list[ev.EvidenceItem] = field(default_factory=list)
    selection: dict | None = None
    warnings: list[str] = field(default_factory=list)


class _Compiler:
    def __init__(self, scenario: LoadedScenario):
        self.sc = scenario
        self.file = str(scenario.path)
        self.problems: list[tuple[str, Diagnostic]] = []
        self.warnings: list[str] = []
        self._text = None

    def line_of(self, key: str) -> int:
        if self._text is None:
            try:
                self._text = self.sc.path.read_text(encoding="utf-8")
            except OSError:
                self._text = ""
        for i, line in enumerate(self._text.splitlines(), start=1):
            if f'"{key}"' in line:
                return i
        return 1

    def error(self, code: str, message: str, key: str | None = None):
        line = self.line_of(key) if key else 1
        self.problems.append((self.file, Diagnostic(line, 1, code, message)))

    def need(self, obj: dict, key: str, kind, where: str):
        if not isinstance(obj, dict) or key not in obj:
            raise _Abort(("S_SCHEMA", f"{where}: missing {key!r}", key))
        value = obj[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, kind):
            raise _Abort(("S_SCHEMA", f"{where}.{key} has the wrong type", key))
        return value

    def file_ref(self, ref: str) -> Path:
        path = resolve_path(ref, self.sc.base_dir)
        if not path.exists():
            raise ScenarioError(2, [(self.file, Diagnostic(self.line_of(ref), 1, "S_MISSING_FILE",
                                                           f"referenced file not found: {ref}"))])
        return path

    # -- sections

    def hypotheses(self, raw: dict) -> ev.HypothesisPair:
        h = raw.get("hypotheses", {}) or {}
        given = "prior_odds" in h
        try:
            return ev.HypothesisPair(h.get("null_label", "Tomb=NTped"), h.get("alt_label", "Tomb≠NTped"),
                                     float(h.get("prior_odds", 1.0)), given)
        except (TypeError, ValueError) as exc:
            raise _Abort(("S_SCHEMA", f"hypotheses: {exc}", "prior_odds")) from None

    def name_model(self, sex: str, spec: dict) -> NameModel:
        where = f"onomasticon.tables.{sex}"
        if "mix" in spec:
            parts = []
            for part in spec["mix"]:
                parts.append((self.table(self.need(part, "path", str, where)), float(part.get("weight", 1.0))))
            table = mix_tables([t for t, _ in parts], [w for _, w in parts])
        else:
            table = self.table(self.need(spec, "path", str, where))
        if table.synthetic:
            self.warnings.append(f"synthetic name table in use: {table.source_label}")
        prior = spec.get("prior", {"kind": "uniform", "alpha": 1.0})
        kind = prior.get("kind", "uniform")
        try:
            if kind == "uniform":
                dp = DirichletPrior.uniform(table.categories, float(prior.get("alpha", 1.0)))
            elif kind == "frequency":
                dp = DirichletPrior.from_frequencies(table, float(self.need(prior, "total", float, where + ".prior")))
            elif kind == "explicit":
                dp = DirichletPrior(table.categories, tuple(float(a) for a in prior["alpha"]))
            else:
                raise _Abort(("S_SCHEMA", f"{where}.prior: unknown kind {kind!r}", "prior"))
        except ValueError as exc:
            raise _Abort(("S_SCHEMA", f"{where}.prior: {exc}", "prior")) from None
        model = NameModel(table, dp, bool(spec.get("use_counts", True)))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            model.counts
        for w in caught:
            if issubclass(w.category, ClampedCountsWarning):
                self.warnings.append(f"clamped counts: {w.message}")
        return model

    def table(self, ref: str):
        path = self.file_ref(ref)
        try:
            table = read_name_table(path)
        except (ValueError, IndexError) as exc:
            raise ScenarioError(2, [(str(path), Diagnostic(1, 1, "S_PARSE", str(exc)))]) from None
        for d in validate_table(table):
            self.problems.append((str(path), d))
        return table

    def pedigree(self, ref: str):
        path = self.file_ref(ref)
        try:
            ped = read_pedigree(path)
        except (ValueError, IndexError) as exc:
            raise ScenarioError(2, [(str(path), Diagnostic(1, 1, "S_PARSE", str(exc)))]) from None
        for d in validate_pedigree(ped):
            self.problems.append((str(path), d))
        return ped

    def family(self, spec: dict, base: dict | None = None) -> FamilyConfiguration:
        base = base or {}
        members = spec.get("members", base.get("members"))
        if not members:
            raise _Abort(("S_SCHEMA", "onomasticon.family: members required", "family"))
        try:
            ms = tuple(Member(m["id"], m["sex"], m["name"], m.get("role", "")) for m in members)
            groups = spec.get("sibling_groups", base.get("sibling_groups", []))
            parents = spec.get("parents", base.get("parents", {}))
            links = {k: (v.get("mother"), v.get("father")) for k, v in parents.items()}
            return FamilyConfiguration(ms, tuple(frozenset(g) for g in groups), links)
        except (KeyError, TypeError, ValueError) as exc:
            raise _Abort(("S_SCHEMA", f"onomasticon.family: {exc}", "family")) from None

    def onomasticon(self, spec: dict) -> dict:
        tables = self.need(spec, "tables", dict, "onomasticon")
        models = {sex: self.name_model(sex, t) for sex, t in tables.items()}
        family = self.family(self.need(spec, "family", dict, "onomasticon"))
        raw_family = spec["family"]
        alternatives = [
            (float(a.get("weight", 1.0)), self.family(a, raw_family)) for a in spec.get("alternatives", [])
        ]
        c = spec.get("constraints", {}) or {}
        try:
            constraints = NamingConstraints(bool(c.get("sibling_distinct", False)),
                                            float(c.get("ancestor_naming_boost", 0.0)))
            nt_spec = [
                IdentificationAssumption(a["member"], a["name"], float(a.get("weight", 1.0)),
                                         a.get("assumption", ""))
                for a in spec.get("nt_spec", [])
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise _Abort(("S_SCHEMA", f"onomasticon: {exc}", "nt_spec")) from None
        for m in family.members:
            if m.sex not in models:
                raise _Abort(("S_SCHEMA", f"no name table for sex {m.sex!r}", "tables"))
        return {"models": models, "family": family, "alternatives": alternatives,
                "constraints": constraints, "nt_spec": nt_spec}

    def population(self, spec: dict, marker: str, where: str) -> HaplotypePopulation:
        try:
            return HaplotypePopulation(marker, tuple(spec["labels"]), tuple(spec["frequencies"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise _Abort(("S_SCHEMA", f"{where}.population: {exc}", "population")) from None

    def observation(self, spec: dict, marker: str, pop, peds, where: str) -> DnaObservation:
        obs = DnaObservation(marker, dict(spec))
        for ped in peds:
            for ind, label in obs.readings.items():
                if ind not in ped:
                    self.error("S_OBSERVATION", f"{where}: {ind!r} is not in pedigree {ped.label!r}", ind)
                elif marker == "Y" and ped.get(ind).sex != "M":
                    self.error("S_OBSERVATION", f"{where}: Y reading on non-male {ind!r}", ind)
                if label not in pop.labels:
                    self.error("S_OBSERVATION", f"{where}: unknown haplotype {label!r}", ind)
        return obs

    def mutation(self, spec: dict, where: str) -> MutationModel:
        try:
            return MutationModel(float(spec.get("mutation_rate", MutationModel().rate)))
        except (TypeError, ValueError) as exc:
            raise _Abort(("S_SCHEMA", f"{where}: {exc}", "mutation_rate")) from None

    def dna_item(self, spec: dict, i: int) -> dict:
        where = f"dna[{i}]"
        marker = self.need(spec, "marker", str, where)
        pop = self.population(self.need(spec, "population", dict, where), marker, where)
        ped_null = self.pedigree(self.need(spec, "pedigree_null", str, where))
        ped_alt = self.pedigree(self.need(spec, "pedigree_alt", str, where))
        obs = self.observation(self.need(spec, "observations", dict, where), marker, pop, (ped_null, ped_alt), where)
        return {"id": spec.get("id", f"dna{i + 1}"), "pop": pop, "mut": self.mutation(spec, where),
                "null": ped_null, "alt": ped_alt, "obs": obs}

    def pedigrees(self, spec: dict) -> dict:
        cands = self.need(spec, "candidates", list, "pedigrees")
        if not cands:
            raise _Abort(("S_SCHEMA", "pedigrees: candidates must be nonempty", "candidates"))
        peds = [self.pedigree(self.need(c, "path", str, "pedigrees.candidates")) for c in cands]
        prior = [float(c.get("prior", 1.0)) for c in cands]
        markers = self.need(spec, "markers", list, "pedigrees")
        pops, obss = [], []
        for j, m in enumerate(markers):
            where = f"pedigrees.markers[{j}]"
            marker = self.need(m, "marker", str, where)
            pop = self.population(self.need(m, "population", dict, where), marker, where)
            pops.append(pop)
            obss.append(self.observation(self.need(m, "observations", dict, where), marker, pop, peds, where))
        return {"candidates": peds, "prior": prior, "pops": pops, "obss": obss,
                "mut": self.mutation(spec, "pedigrees")}

    def network(self, spec: dict) -> dict:
        ref = self.need(spec, "model", str, "network")
        path = self.file_ref(ref)
        try:
            doc = parse(path.read_text(encoding="utf-8"))
        except OOBNParseError as exc:
            raise ScenarioError(2, [(str(path), d) for d in exc.diagnostics]) from None
        diags = validate(doc)
        for d in diags:
            self.problems.append((str(path), d))
        if has_errors(diags):
            return {}
        net = flatten(doc)
        hyp = self.need(spec, "hypothesis_node", str, "network")
        items = self.need(spec, "items", dict, "network")
        try:
            hyp = net.canonical(hyp)
            null_state = net.variables[hyp].index(self.need(spec, "null_state", str, "network"))
            alt_state = net.variables[hyp].index(self.need(spec, "alt_state", str, "network"))
            for item in items.values():
                net.state_index(item)
        except (KeyError, ValueError) as exc:
            raise _Abort(("S_SCHEMA", f"network: {exc}", "network")) from None
        return {"net": net, "hypothesis": hyp, "null": null_state, "alt": alt_state, "items": items,
                "include_in_product": bool(spec.get("include_in_product", False)), "model": ref}

    def selection(self, spec: dict) -> dict:
        p = spec.get("per_trial_probability")
        if not (p == "onomasticon" or isinstance(p, (int, float))):
            raise _Abort(("S_SCHEMA", "selection.per_trial_probability must be a number or 'onomasticon'",
                          "per_trial_probability"))
        trials = spec.get("trials")
        try:
            if isinstance(trials, int) and not isinstance(trials, bool):
                prior = ev.CountPrior("trials", ev.POINT, value=trials)
            elif isinstance(trials, dict):
                prior = ev.CountPrior(trials.get("quantity", "trials"), trials.get("kind", ""),
                                      value=trials.get("value"), lo=trials.get("lo"), hi=trials.get("hi"),
                                      mean=trials.get("mean"))
            else:
                raise ValueError("trials must be an integer or a count prior")
        except ValueError as exc:
            raise _Abort(("S_SCHEMA", f"selection: {exc}", "trials")) from None
        return {"p": p, "trials": prior}

    def compile(self) -> CompiledScenario:
        raw = self.sc.raw
        for key in raw:
            if key not in TOP_LEVEL_KEYS:
                self.error("S_UNKNOWN_KEY", f"unknown top-level key {key!r}", key)
        try:
            out = CompiledScenario(self.sc.name, raw, self.hypotheses(raw))
            ci = raw.get("conditionally_independent", True)
            out.conditionally_independent = bool(ci)
            if "onomasticon" in raw:
                out.onomasticon = self.onomasticon(raw["onomasticon"])
            for i, spec in enumerate(raw.get("dna", [])):
                out.dna.append(self.dna_item(spec, i))
            if "pedigrees" in raw:
                out.pedigrees = self.pedigrees(raw["pedigrees"])
            if "network" in raw:
                out.network = self.network(raw["network"]) or None
            for i, d in enumerate(raw.get("direct", [])):
                lr = d.get("lr")
                if not isinstance(lr, (int, float)) or lr < 0:
                    lr = {"+infinity": math.inf, "undefined": math.nan}.get(lr)
                    if lr is None:
                        raise _Abort(("S_SCHEMA", f"direct[{i}].lr must be a nonnegative number", "direct"))
                out.direct.append(ev.EvidenceItem(d.get("id", f"direct{i + 1}"), ev.DIRECT, float(lr),
                                                  d.get("provenance", "stated")))
            if "selection" in raw:
                out.selection = self.selection(raw["selection"])
            if not out.conditionally_independent and out.network is None and "network" not in raw:
                self.error("S_NEEDS_NETWORK",
                           "conditional independence is off: a joint network model is required",
                           "conditionally_independent")
        except _Abort as exc:
            code, message, key = exc.args[0]
            self.error(code, message, key)
            out = None
        if any(d.is_error for _, d in self.problems):
            raise ScenarioError(1, self.problems)
        if out is None:  # pragma: no cover - an abort always records an error
            raise ScenarioError(1, self.problems)
        if not out.hypotheses.prior_odds_given:
            self.warnings.append("prior odds not specified; the placeholder value 1 is used")
        out.warnings = self.warnings
        return out


class _Abort(Exception):
    pass


def compile_scenario(scenario: LoadedScenario) -> CompiledScenario:
    return _Compiler(scenario).compile()


def check_scenario(scenario: LoadedScenario) -> list[tuple[str, Diagnostic]]:
    """All diagnostics (including warnings) for a scenario and the files it references."""
    comp = _Compiler(scenario)
    comp.compile()
    return comp.problems


# --------------------------------------------------------------------------
# evaluation


def _lr_entry(item_id: str, kind: str, lr: float, provenance: str = "", **details) -> dict:
    entry = {
        "id": item_id,
        "kind": kind,
        "lr": lr_to_json(lr),
        "inverse_lr": lr_to_json(inverse(lr)),
        "state": lr_state(lr),
        "provenance": provenance,
    }
    if details:
        entry["details"] = {k: _jsonable(v) for k, v in details.items()}
    return entry


def _jsonable(x):
    if isinstance(x, float):
        if math.isnan(x):
            return UNDEFINED
        if math.isinf(x):
            return "+infinity" if x > 0 else "-infinity"
        return x
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def evaluate(compiled: CompiledScenario) -> dict:
    """Evaluate every evidence item and combine them; returns the report dict."""
    warn = list(compiled.warnings)
    notes: list[str] = []
    items: list[ev.EvidenceItem] = []
    entries: list[dict] = []
    ono_parts = None

    if compiled.onomasticon is not None:
        o = compiled.onomasticon
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if o["alternatives"]:
                alt = family_likelihood_alt_mixture(o["alternatives"], o["models"], o["constraints"])
            else:
                alt = family_likelihood_alt(o["family"], o["models"], o["constraints"])
            null = family_likelihood_null(o["family"], o["nt_spec"], o["models"], o["constraints"])
        for w in caught:
            if issubclass(w.category, ImpossibleConfigurationWarning):
                warn.append(f"impossible name configuration under the alternative: {w.message}")
        lr = likelihood_ratio(alt, null)
        ono_parts = (alt, null)
        items.append(ev.EvidenceItem("onomasticon", ev.ONOMASTICON, lr, "onomasticon"))
        entries.append(_lr_entry("onomasticon", ev.ONOMASTICON, lr, "onomasticon",
                                 alt_likelihood=alt, null_likelihood=null))

    for d in compiled.dna:
        log_alt = log_dna_likelihood(d["alt"], d["pop"], d["mut"], d["obs"])
        log_null = log_dna_likelihood(d["null"], d["pop"], d["mut"], d["obs"])
        lr = dna_lr(d["obs"], d["pop"], d["mut"], d["null"], d["alt"])
        items.append(ev.EvidenceItem(d["id"], ev.DNA, lr, f"dna:{d['null'].label}/{d['alt'].label}"))
        entries.append(_lr_entry(d["id"], ev.DNA, lr, f"dna:{d['null'].label}/{d['alt'].label}",
                                 marker=d["pop"].marker, mutation_rate=d["mut"].rate,
                                 alt_likelihood=math.exp(log_alt), null_likelihood=math.exp(log_null)))

    for item in compiled.direct:
        items.append(item)
        entries.append(_lr_entry(item.item_id, ev.DIRECT, item.lr, item.provenance))

    network_report = None
    if compiled.network is not None:
        n = compiled.network
        net_items = ev.network_items(n["net"], n["hypothesis"], n["null"], n["alt"], n["items"])
        all_ev: dict = {}
        for group in n["items"].values():
            all_ev.update(group)
        joint = ev.network_lr(n["net"], n["hypothesis"], n["null"], n["alt"], all_ev)
        product = ev.combine_lrs(net_items).overall_lr
        consistent = None
        if math.isfinite(joint) and math.isfinite(product) and joint > 0:
            consistent = abs(product - joint) <= 1e-9 * max(1.0, abs(joint))
        network_report = {
            "model": n["model"],
            "hypothesis_node": n["hypothesis"],
            "items": [_lr_entry(it.item_id, ev.NETWORK, it.lr, it.provenance) for it in net_items],
            "product_of_items": lr_to_json(product),
            "joint_lr": lr_to_json(joint),
            "product_matches_joint": consistent,
            "included_in_overall": n["include_in_product"] or not compiled.conditionally_independent,
        }
        if consistent is False:
            warn.append("network item LRs do not multiply to the joint network LR "
                        "(items are not conditionally independent given the hypothesis)")
        if n["include_in_product"] and compiled.conditionally_independent:
            items.extend(net_items)
            entries.extend(network_report["items"])

    if compiled.conditionally_independent:
        combined = ev.combine_lrs(items, compiled.hypotheses)
        overall = combined.overall_lr
        method = "product of conditionally independent items"
    else:
        overall = ev.network_lr(compiled.network["net"], compiled.network["hypothesis"],
                                compiled.network["null"], compiled.network["alt"],
                                {k: v for g in compiled.network["items"].values() for k, v in g.items()})
        combined = None
        method = "joint network model (conditional independence disabled)"
        if items:
            warn.append("conditional independence is off: separately computed items are reported "
                        "but not multiplied into the overall LR")
    odds, prob = ev.posterior_from_lr(compiled.hypotheses, overall)

    for entry in entries:
        if entry["state"] == UNDEFINED:
            warn.append(f"LR of item {entry['id']!r} is undefined (0/0)")
        elif entry["state"] == INFINITE:
            notes.append(f"item {entry['id']!r}: {DISCONFIRMATION_NOTE}")
    if lr_state(overall) == UNDEFINED:
        warn.append("overall LR is undefined (a zero and an infinite item, or an undefined item)")
    elif lr_state(overall) == INFINITE and not notes:
        notes.append(f"overall: {DISCONFIRMATION_NOTE}")

    report = {
        "schema": SCHEMA,
        "scenario": {"name": compiled.name, "parameters": compiled.raw},
        "hypotheses": {
            "null": compiled.hypotheses.null_label,
            "alt": compiled.hypotheses.alt_label,
            "prior_odds_alt_vs_null": compiled.hypotheses.prior_odds,
            "lr_orientation": "P(E|H1)/P(E|H0), H1 = alt",
        },
        "items": entries,
        "overall": {
            "method": method,
            "lr": lr_to_json(overall),
            "inverse_lr": lr_to_json(inverse(overall)),
            "state": lr_state(overall),
            "log10_lr": _log10(overall),
        },
        "posterior": {
            "odds_alt_vs_null": _jsonable(odds),
            "probability_alt": _jsonable(prob),
            "probability_null": _jsonable(1.0 - prob) if not math.isnan(prob) else UNDEFINED,
        },
    }
    if network_report is not None:
        report["network"] = network_report
    if compiled.selection is not None:
        report["selection"] = _selection_report(compiled.selection, ono_parts)
    if compiled.pedigrees is not None:
        report["pedigrees"] = pedigree_report(compiled)
        if report["pedigrees"]["undefined"]:
            warn.append("all candidate pedigrees have zero likelihood; posterior undefined")
    report["notes"] = _unique(notes)
    report["warnings"] = _unique(warn)
    return report


def _log10(lr: float):
    if math.isnan(lr):
        return None
    return _jsonable(math.log10(lr) if lr > 0 else -math.inf)


def _unique(xs: list[str]) -> list[str]:
    seen = set()
    out = []
    for x in xs:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


def _selection_report(sel: dict, ono_parts) -> dict:
    p = sel["p"]
    source = "stated"
    if p == "onomasticon":
        if ono_parts is None:
            raise ScenarioError(1, [("<scenario>", Diagnostic(1, 1, "S_SCHEMA",
                                                              "selection uses the onomasticon but none is given"))])
        p, source = ono_parts[0], "onomasticon alternative likelihood"
    prior = sel["trials"]
    adjusted = ev.integrate_over_count(prior, lambda t: ev.selection_adjust(p, t))
    out = {
        "per_trial_probability": p,
        "per_trial_source": source,
        "trials": {"kind": prior.kind, "expected": prior.expected()},
        "at_least_one_probability": adjusted,
        "note": "reported alongside the unadjusted values; not used in the overall LR",
    }
    if source != "stated":
        out["adjusted_onomasticon_lr"] = lr_to_json(likelihood_ratio(adjusted, ono_parts[1]))
    return out


def pedigree_report(compiled: CompiledScenario) -> dict:
    p = compiled.pedigrees
    result = most_probable_pedigree(p["candidates"], p["pops"], p["mut"], p["obss"], p["prior"])
    rows = []
    for i, label in enumerate(result.labels):
        rows.append({
            "index": i,
            "label": label,
            "prior": result.prior[i],
            "log_likelihood": _jsonable(result.log_likelihoods[i]),
            "posterior": None if result.undefined else result.posterior[i],
            "argmax": result.argmax == i,
        })
    if not result.undefined:
        rows.sort(key=lambda r: (-r["posterior"], r["index"]))
    return {
        "markers": [pop.marker for pop in p["pops"]],
        "mutation_rate": p["mut"].rate,
        "candidates": rows,
        "argmax": None if result.undefined else result.labels[result.argmax],
        "undefined": result.undefined,
    }


def evaluate_raw(raw: dict, path: Path) -> dict:
    """Compile and evaluate a (possibly modified) scenario dict."""
    return evaluate(compile_scenario(LoadedScenario(raw, path)))


def sweep(scenario: LoadedScenario, axes: list[tuple[str, list[Any]]], workers: int = 1) -> dict:
    """Evaluate the scenario over a grid; the report of the first grid point plus a sweep table."""
    rows = ev.sensitivity_sweep(scenario.raw, axes, lambda raw: evaluate_raw(raw, scenario.path), workers)
    table = []
    for row in rows:
        rep = row.result
        table.append({
            "indices": list(row.indices),
            "values": {path: _jsonable(v) for (path, _), v in zip(axes, row.values)},
            "overall_lr": rep["overall"]["lr"],
            "inverse_lr": rep["overall"]["inverse_lr"],
            "state": rep["overall"]["state"],
            "items": {e["id"]: e["lr"] for e in rep["items"]},
            "probability_alt": rep["posterior"]["probability_alt"],
        })
    first = copy.deepcopy(rows[0].result)
    first["sweep"] = {"axes": [{"path": p, "values": _jsonable(list(v))} for p, v in axes], "rows": table}
    warn = list(first["warnings"])
    for row in rows[1:]:
        warn.extend(row.result["warnings"])
    first["warnings"] = _unique(warn)
    return first


def dumps_report(report: dict) -> str:
    """Canonical machine-readable form (sorted keys, fixed indentation)."""
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"
