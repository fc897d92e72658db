"""Certification reports: run manifests, analysis, and rendering.

`analyze` composes the estimator, P-value and no-signaling modules into one
deterministic report; `render_text` prints it in the layout of the published
data tables and `to_dict`/`report_from_dict` give a machine-readable form
that round-trips exactly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import DataFormatError, DomainError
from .events import (
    HERALDS,
    PAIRS,
    PSI_MINUS,
    PSI_PLUS,
    CorrelationTable,
    EstimatorMethod,
    RunDataset,
    SEstimate,
    SettingAngles,
    combine_states,
    correlator,
    s_combined_event_based,
    s_event_based_from_counts,
    s_per_state,
    wins_from_table,
)
from .eventio import read_events
from .nosignaling import build_tables, nosignal_ttest, setting_independence_ztest
from .pvalues import PValueReport, Predictability, pvalue_game, pvalue_martingale

_HERALD_KEY = {PSI_PLUS: "psi_plus", PSI_MINUS: "psi_minus"}
_HERALD_TITLE = {PSI_PLUS: "psi+", PSI_MINUS: "psi-"}


@dataclass(frozen=True)
class RunManifest:
    """Pre-registered description of a run analysis."""

    run_id: str
    events: str
    tau: float = 0.0
    angles: SettingAngles = field(default_factory=SettingAngles)
    precision: int = 3
    format: str = "text"
    note: str = ""

    def __post_init__(self):
        Predictability(self.tau)  # domain check
        if self.precision < 1:
            raise DomainError("precision must be >= 1")
        if self.format not in ("text", "json"):
            raise DomainError(f"unknown report format {self.format!r}")

    @classmethod
    def from_file(cls, path) -> "RunManifest":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"invalid JSON in manifest {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise DataFormatError("manifest must be a JSON object")
        known = {"run_id", "events", "tau", "angles", "precision", "format", "note"}
        unknown = set(data) - known
        if unknown:
            raise DataFormatError(f"unknown manifest fields: {', '.join(sorted(unknown))}")
        try:
            angles = SettingAngles(**data.get("angles", {}))
        except TypeError as exc:
            raise DataFormatError(f"bad angles section: {exc}") from exc
        events = data.get("events")
        if not events:
            raise DataFormatError("manifest is missing the events path")
        events_path = Path(events)
        if not events_path.is_absolute():
            events_path = path.parent / events_path
        return cls(
            run_id=data.get("run_id", path.stem),
            events=str(events_path),
            tau=float(data.get("tau", 0.0)),
            angles=angles,
            precision=int(data.get("precision", 3)),
            format=data.get("format", "text"),
            note=data.get("note", ""),
        )


@dataclass(frozen=True)
class CellReport:
    a: int
    b: int
    counts: tuple[int, int, int, int]
    total: int
    correlator: float
    sigma: float


@dataclass(frozen=True)
class HeraldSection:
    herald: int
    cells: tuple[CellReport, ...]
    n: int
    wins: int
    s_per_setting: SEstimate
    s_event_based: SEstimate
    p_martingale: PValueReport
    p_game: PValueReport


@dataclass(frozen=True)
class CombinedSection:
    n: int
    wins: int
    s_weighted_mean: SEstimate
    s_combined_event_based: SEstimate
    s_event_based: SEstimate
    p_martingale: PValueReport
    p_game: PValueReport


@dataclass(frozen=True)
class TestReport:
    table: tuple[tuple[int, int], tuple[int, int]]
    statistic: float
    pvalue: float


@dataclass(frozen=True)
class NoSignalingSection:
    settings: TestReport
    y_by_a: TestReport
    x_by_b: TestReport


@dataclass(frozen=True)
class CertificationReport:
    run_id: str
    tau: float
    sections: dict[str, HeraldSection]
    combined: CombinedSection
    nosignaling: NoSignalingSection


def _herald_section(table: CorrelationTable, herald: int, tau: float) -> HeraldSection:
    cells = []
    for a, b in PAIRS:
        cell = table.cell(herald, a, b)
        e, sig = correlator(cell)
        cells.append(CellReport(
            a=a, b=b, counts=(cell.n_uu, cell.n_ud, cell.n_du, cell.n_dd),
            total=cell.total, correlator=e, sigma=sig,
        ))
    w, n = wins_from_table(table, herald)
    s_eb_value = s_event_based_from_counts(w, n)
    sigma_eb = ((16.0 - s_eb_value * s_eb_value) / (n - 1)) ** 0.5 if n > 1 else 0.0
    s_eb = SEstimate(s_eb_value, sigma_eb, EstimatorMethod.EVENT_BASED)
    return HeraldSection(
        herald=herald,
        cells=tuple(cells),
        n=n,
        wins=w,
        s_per_setting=s_per_state(table, herald),
        s_event_based=s_eb,
        p_martingale=pvalue_martingale(s_eb_value, n, tau),
        p_game=pvalue_game(w, n, tau),
    )


def analyze_dataset(dataset: RunDataset, *, tau: float | None = None,
                    run_id: str | None = None) -> CertificationReport:
    """Full certification analysis of one event-ready dataset."""
    tau = dataset.tau if tau is None else tau
    tau = 0.0 if tau is None else tau
    table = CorrelationTable.from_dataset(dataset)
    sections = {
        _HERALD_KEY[h]: _herald_section(table, h, tau) for h in HERALDS
    }
    weighted = combine_states(
        s_per_state(table, PSI_PLUS, sigma="binomial"),
        s_per_state(table, PSI_MINUS, sigma="binomial"),
    )
    w_tot = sum(sections[_HERALD_KEY[h]].wins for h in HERALDS)
    n_tot = sum(sections[_HERALD_KEY[h]].n for h in HERALDS)
    s_eb_value = s_event_based_from_counts(w_tot, n_tot)
    sigma_eb = ((16.0 - s_eb_value * s_eb_value) / (n_tot - 1)) ** 0.5 if n_tot > 1 else 0.0
    combined = CombinedSection(
        n=n_tot,
        wins=w_tot,
        s_weighted_mean=weighted,
        s_combined_event_based=s_combined_event_based(table),
        s_event_based=SEstimate(s_eb_value, sigma_eb, EstimatorMethod.EVENT_BASED),
        p_martingale=pvalue_martingale(s_eb_value, n_tot, tau),
        p_game=pvalue_game(w_tot, n_tot, tau),
    )
    tables = build_tables(dataset)
    zres = setting_independence_ztest(tables.settings)
    t_y = nosignal_ttest(tables.y_by_a)
    t_x = nosignal_ttest(tables.x_by_b)
    nosig = NoSignalingSection(
        settings=TestReport(
            table=((tables.settings.n00, tables.settings.n01),
                   (tables.settings.n10, tables.settings.n11)),
            statistic=zres.z, pvalue=zres.pvalue),
        y_by_a=TestReport(
            table=((tables.y_by_a.n00, tables.y_by_a.n01),
                   (tables.y_by_a.n10, tables.y_by_a.n11)),
            statistic=t_y.t, pvalue=t_y.pvalue),
        x_by_b=TestReport(
            table=((tables.x_by_b.n00, tables.x_by_b.n01),
                   (tables.x_by_b.n10, tables.x_by_b.n11)),
            statistic=t_x.t, pvalue=t_x.pvalue),
    )
    return CertificationReport(
        run_id=run_id or dataset.label or "run",
        tau=tau,
        sections=sections,
        combined=combined,
        nosignaling=nosig,
    )


def analyze(manifest: RunManifest) -> CertificationReport:
    """Analyze per a manifest: ingest the event file, then run everything."""
    dataset = read_events(manifest.events, angles=manifest.angles,
                          tau=manifest.tau, label=manifest.run_id)
    return analyze_dataset(dataset, tau=manifest.tau, run_id=manifest.run_id)


# --- serialization -------------------------------------------------------


def to_dict(report: CertificationReport) -> dict:
    d = asdict(report)
    for sec in d["sections"].values():
        sec["s_per_setting"]["method"] = sec["s_per_setting"]["method"].value
        sec["s_event_based"]["method"] = sec["s_event_based"]["method"].value
        for p in ("p_martingale", "p_game"):
            sec[p]["method"] = sec[p]["method"].value
    comb = d["combined"]
    for key in ("s_weighted_mean", "s_combined_event_based", "s_event_based"):
        comb[key]["method"] = comb[key]["method"].value
    for p in ("p_martingale", "p_game"):
        comb[p]["method"] = comb[p]["method"].value
    return d


def render_json(report: CertificationReport) -> str:
    return json.dumps(to_dict(report), sort_keys=True, indent=2) + "\n"


def _tuplify(seq):
    return tuple(tuple(v) if isinstance(v, list) else v for v in seq)


def _sestimate_from(d) -> SEstimate:
    return SEstimate(d["value"], d["sigma"], EstimatorMethod(d["method"]))


def _preport_from(d) -> PValueReport:
    from .pvalues import PValueMethod

    return PValueReport(PValueMethod(d["method"]), d["log_p"], d["n"],
                        d["tau"], s=d["s"], wins=d["wins"])


def _cell_from(d) -> CellReport:
    return CellReport(d["a"], d["b"], tuple(d["counts"]), d["total"],
                      d["correlator"], d["sigma"])


def _test_from(d) -> TestReport:
    return TestReport(table=_tuplify(d["table"]), statistic=d["statistic"],
                      pvalue=d["pvalue"])


def report_from_dict(d: dict) -> CertificationReport:
    sections = {}
    for key, sec in d["sections"].items():
        sections[key] = HeraldSection(
            herald=sec["herald"],
            cells=tuple(_cell_from(c) for c in sec["cells"]),
            n=sec["n"], wins=sec["wins"],
            s_per_setting=_sestimate_from(sec["s_per_setting"]),
            s_event_based=_sestimate_from(sec["s_event_based"]),
            p_martingale=_preport_from(sec["p_martingale"]),
            p_game=_preport_from(sec["p_game"]),
        )
    comb = d["combined"]
    combined = CombinedSection(
        n=comb["n"], wins=comb["wins"],
        s_weighted_mean=_sestimate_from(comb["s_weighted_mean"]),
        s_combined_event_based=_sestimate_from(comb["s_combined_event_based"]),
        s_event_based=_sestimate_from(comb["s_event_based"]),
        p_martingale=_preport_from(comb["p_martingale"]),
        p_game=_preport_from(comb["p_game"]),
    )
    ns = d["nosignaling"]
    nosig = NoSignalingSection(
        settings=_test_from(ns["settings"]),
        y_by_a=_test_from(ns["y_by_a"]),
        x_by_b=_test_from(ns["x_by_b"]),
    )
    return CertificationReport(run_id=d["run_id"], tau=d["tau"],
                               sections=sections, combined=combined,
                               nosignaling=nosig)


def parse_report(text: str) -> CertificationReport:
    return report_from_dict(json.loads(text))


# --- text rendering ------------------------------------------------------

_ANGLE_LABEL = {(0, 0): "0,-45", (0, 1): "0,+45", (1, 0): "90,-45", (1, 1): "90,+45"}


def render_text(report: CertificationReport, precision: int = 3) -> str:
    p = precision
    lines = [f"run {report.run_id}   (tau = {report.tau:g})", ""]
    for herald in HERALDS:
        sec = report.sections[_HERALD_KEY[herald]]
        lines.append(f"--- {_HERALD_TITLE[herald]} ---")
        lines.append(f"{'a,b':>8} {'uu':>6} {'ud':>6} {'du':>6} {'dd':>6} "
                     f"{'total':>7}   correlator")
        for cell in sec.cells:
            lines.append(
                f"{_ANGLE_LABEL[(cell.a, cell.b)]:>8} "
                f"{cell.counts[0]:>6} {cell.counts[1]:>6} "
                f"{cell.counts[2]:>6} {cell.counts[3]:>6} {cell.total:>7}   "
                f"{cell.correlator:+.{p}f} +- {cell.sigma:.{p}f}")
        lines.append(f"  S (per setting)   {sec.s_per_setting.value:.{p}f} "
                     f"+- {sec.s_per_setting.sigma:.{p}f}")
        lines.append(f"  S (event based)   {sec.s_event_based.value:.{p}f} "
                     f"+- {sec.s_event_based.sigma:.{p}f}")
        lines.append(f"  wins              {sec.wins} of {sec.n}")
        lines.append(f"  P_m               {sec.p_martingale.p_bound:.3e}")
        lines.append(f"  P_g               {sec.p_game.p_bound:.3e}")
        lines.append("")
    comb = report.combined
    lines.append("--- combined ---")
    lines.append(f"  S (weighted mean) {comb.s_weighted_mean.value:.{p}f} "
                 f"+- {comb.s_weighted_mean.sigma:.{p}f}")
    lines.append(f"  S (event based)   {comb.s_combined_event_based.value:.{p}f} "
                 f"+- {comb.s_combined_event_based.sigma:.{p}f}")
    lines.append(f"  wins              {comb.wins} of {comb.n}")
    lines.append(f"  P_m               {comb.p_martingale.p_bound:.3e}")
    lines.append(f"  P_g               {comb.p_game.p_bound:.3e}")
    lines.append("")
    ns = report.nosignaling
    lines.append("--- no-signaling ---")
    lines.append(f"  settings a vs b   z = {ns.settings.statistic:+.3f}, "
                 f"P = {ns.settings.pvalue:.3f}   {ns.settings.table}")
    lines.append(f"  y vs remote a     t = {ns.y_by_a.statistic:+.3f}, "
                 f"P = {ns.y_by_a.pvalue:.3f}   {ns.y_by_a.table}")
    lines.append(f"  x vs remote b     t = {ns.x_by_b.statistic:+.3f}, "
                 f"P = {ns.x_by_b.pvalue:.3f}   {ns.x_by_b.table}")
    return "\n".join(lines) + "\n"
