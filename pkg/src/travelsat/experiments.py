"""Experiment orchestration: sweeps, artifacts, and reports.

Every runner takes one ExperimentConfig, loads or synthesizes a dataset,
executes its protocol, and writes a fixed set of artifacts under the output
directory: per-trial CSVs, an aggregate CSV, a plain-text summary, a
reasoning archive, and a provenance record with config and schema hashes.
With the scripted mock backend, identical configs produce byte-identical
artifacts run after run.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .baselines import (
    FractionResult,
    GbdtHyper,
    fit_gbdt,
    fraction_sweep,
    importance_gbdt,
)
from .client import HttpChatBackend, LlmClient, LlmParams
from .dataset import Dataset, load_survey, split
from .encoding import encode_matrix, fit_encoding
from .errors import DatasetError, ParseError, TravelSatError
from .evaluation import (
    MetricPair,
    RunReport,
    aggregate_repeats,
    compare_importances,
    evaluate,
    format_cell,
)
from .mock import ScriptedMock
from .prompting import (
    DEFAULT_BATCH_SIZE,
    batched,
    parse_response,
    render_few_shot,
    render_zero_shot,
)
from .schema import VariableSchema, default_schema, load_schema
from .selection import (
    SupportSet,
    empty_support,
    random_support,
    rank_support,
    representativeness_report,
    summarize_ks_repeats,
)
from .synthesize import default_marginals, load_marginals, synthesize

logger = logging.getLogger(__name__)

DEFAULT_SUPPORT_SIZES = (0, 3, 6, 9, 12, 15, 18)
DEFAULT_FRACTIONS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 200
    seed: int = 7
    label_rule: str = "linear"
    noise: float = 0.2
    marginals_path: str | None = None


@dataclass(frozen=True)
class MockSpec:
    rule: str = "linear"
    mode: str = "nn"
    noise_seed: int = 0
    noise_scale: float = 0.0


@dataclass(frozen=True)
class ExperimentConfig:
    data_path: str | None = None
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)
    schema_path: str | None = None
    support_sizes: tuple[int, ...] = DEFAULT_SUPPORT_SIZES
    repeats: int = 3
    train_fraction: float = 0.8
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    seed: int = 0
    vary_split: bool = False
    batch_size: int = DEFAULT_BATCH_SIZE
    best_k: int = 6
    llm: LlmParams = field(default_factory=LlmParams)
    # None talks to the real endpoint; experiments are offline by default
    mock: MockSpec | None = field(default_factory=MockSpec)
    max_in_flight: int = 4
    gbdt: GbdtHyper = field(default_factory=GbdtHyper)
    # importance repeats need fit variation, so the study subsamples rows
    importance_subsample: float = 0.8
    cache_dir: str | None = None
    out_dir: str = "runs/out"

    def __post_init__(self):
        if self.repeats < 1:
            raise DatasetError("repeats must be at least 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise DatasetError("train_fraction must be in (0, 1)")
        if any(k < 0 for k in self.support_sizes):
            raise DatasetError("support sizes must be non-negative")
        if self.batch_size < 1:
            raise DatasetError("batch_size must be at least 1")
        if self.best_k < 1:
            raise DatasetError("best_k must be at least 1")
        if not 0.0 < self.importance_subsample <= 1.0:
            raise DatasetError("importance_subsample must be in (0, 1]")

    def semantic_dict(self) -> dict:
        """Config as a dict, minus fields that do not affect results."""
        d = dataclasses.asdict(self)
        d.pop("out_dir")
        d.pop("cache_dir")
        d.pop("max_in_flight")
        return d

    def content_hash(self) -> str:
        payload = json.dumps(self.semantic_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def config_from_dict(d: dict) -> ExperimentConfig:
    d = dict(d)
    if "synthetic" in d and d["synthetic"] is not None:
        d["synthetic"] = SyntheticSpec(**d["synthetic"])
    if d.get("mock") is not None:
        d["mock"] = MockSpec(**d["mock"])
    if "llm" in d and d["llm"] is not None:
        d["llm"] = LlmParams(**d["llm"])
    if "gbdt" in d and d["gbdt"] is not None:
        d["gbdt"] = GbdtHyper(**d["gbdt"])
    for key in ("support_sizes", "fractions"):
        if key in d and d[key] is not None:
            d[key] = tuple(d[key])
    unknown = set(d) - {f.name for f in dataclasses.fields(ExperimentConfig)}
    if unknown:
        raise DatasetError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**d)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise DatasetError(f"{path}: cannot read config: {exc}") from exc
    except ValueError as exc:
        raise DatasetError(f"{path}: not valid JSON: {exc}") from exc
    try:
        return config_from_dict(payload)
    except TypeError as exc:
        raise DatasetError(f"{path}: bad config: {exc}") from exc


def load_dataset(config: ExperimentConfig) -> Dataset:
    schema = load_schema(config.schema_path) if config.schema_path else default_schema()
    if config.data_path:
        return load_survey(config.data_path, schema=schema)
    spec = config.synthetic
    marginals = (load_marginals(spec.marginals_path) if spec.marginals_path
                 else default_marginals())
    return synthesize(spec.n, seed=spec.seed, label_rule=spec.label_rule,
                      noise=spec.noise, marginals=marginals, schema=schema)


def make_client(config: ExperimentConfig, schema: VariableSchema) -> LlmClient:
    if config.mock is not None:
        backend = ScriptedMock(rule=config.mock.rule, mode=config.mock.mode,
                               schema=schema, noise_seed=config.mock.noise_seed,
                               noise_scale=config.mock.noise_scale)
    else:
        backend = HttpChatBackend()
    return LlmClient(backend, config.llm, cache_dir=config.cache_dir,
                     max_in_flight=config.max_in_flight)


# -- trial execution -------------------------------------------------------


@dataclass
class Trial:
    condition: str
    repeat: int
    status: str = "ok"
    metrics: MetricPair | None = None
    reasoning: str = ""


def _archive_name(condition: str, repeat: int) -> str:
    safe = condition.replace(" ", "_").replace("(", "").replace(")", "")
    return f"{safe}_rep{repeat}.txt"


def _score_queries(client: LlmClient, support: SupportSet,
                   queries: Sequence, schema: VariableSchema,
                   batch_size: int, trial_base: int) -> tuple[dict[str, float], str]:
    """Score every query in batches; returns (scores by id, reasoning text).

    A batch whose response fails to parse is retried once under a fresh
    cache slot; a second failure raises ParseError for the caller to record.
    """
    if support.k > 0:
        overlap = set(support.ids) & {q.record_id for q in queries}
        assert not overlap, f"support leaked into queries: {sorted(overlap)}"
    scores: dict[str, float] = {}
    reasoning_parts: list[str] = []
    jobs = []
    prompts = []
    for batch in batched(list(queries), batch_size):
        if support.k > 0:
            prompt = render_few_shot(support, batch, schema)
        else:
            prompt = render_zero_shot(batch, schema)
        prompts.append((prompt, [q.record_id for q in batch]))
        jobs.append((prompt, trial_base))
    responses = client.complete_many(jobs)
    for (prompt, ids), response in zip(prompts, responses):
        try:
            parsed = parse_response(response.content, ids)
        except ParseError:
            logger.warning("batch failed to parse, retrying once")
            response = client.cached_complete(prompt, trial_base + 1)
            parsed = parse_response(response.content, ids)
        scores.update(parsed.scores)
        part = ""
        if response.reasoning:
            part += "[reasoning channel]\n" + response.reasoning + "\n"
        part += "[response commentary]\n" + (parsed.reasoning or "(none)")
        reasoning_parts.append(part)
    return scores, "\n\n".join(reasoning_parts)


def _request_importance(client: LlmClient, support: SupportSet,
                        probe: Sequence, schema: VariableSchema,
                        trial_base: int) -> dict[str, float]:
    if support.k > 0:
        prompt = render_few_shot(support, probe, schema, want_importance=True)
    else:
        prompt = render_zero_shot(probe, schema, want_importance=True)
    ids = [q.record_id for q in probe]
    response = client.cached_complete(prompt, trial_base)
    try:
        parsed = parse_response(response.content, ids, want_importance=True)
    except ParseError:
        logger.warning("importance response failed to parse, retrying once")
        response = client.cached_complete(prompt, trial_base + 1)
        parsed = parse_response(response.content, ids, want_importance=True)
    assert parsed.importances is not None
    return parsed.importances


# -- artifact writing ------------------------------------------------------


def _write_provenance(out: Path, config: ExperimentConfig, experiment: str,
                      schema: VariableSchema, dataset: Dataset) -> None:
    payload = {
        "experiment": experiment,
        "config_hash": config.content_hash(),
        "config": config.semantic_dict(),
        "schema_fingerprint": schema.fingerprint(),
        "dataset": {
            "n": len(dataset),
            "dropped_rows": dataset.dropped,
            "source": config.data_path or "synthetic",
        },
    }
    (out / "provenance.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    lines = [",".join(header)]
    lines += [",".join(str(cell) for cell in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.6f}"


def _render_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def line(cells):
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)).rstrip()
    return "\n".join([line(headers), line(["-" * w for w in widths])]
                     + [line(row) for row in rows])


@dataclass
class SweepRow:
    condition: str
    report: RunReport | None
    failures: int
    ks_cell: str | None = None


def _condition_label(k: int) -> str:
    return "0 (zero-shot)" if k == 0 else str(k)


def _write_sweep_artifacts(out: Path, title: str, trials: list[Trial],
                           rows: list[SweepRow], with_ks: bool,
                           ks_rows: list[Sequence] | None = None) -> str:
    _write_csv(out / "report.csv",
               ["condition", "repeat", "status", "n", "mse", "mape"],
               [[t.condition, t.repeat, t.status,
                 t.metrics.n if t.metrics else "",
                 _fmt(t.metrics.mse if t.metrics else None),
                 _fmt(t.metrics.mape if t.metrics else None)] for t in trials])
    agg_header = ["condition", "repeats_ok", "failures",
                  "mse_mean", "mse_std", "mape_mean", "mape_std"]
    if with_ks:
        agg_header.append("ks_flags")

    def std_cell(report: RunReport | None, value: float | None) -> str:
        if report is None:
            return ""
        # a single repeat has no spread to report; never claim 0
        return "n/a" if value is None else _fmt(value)

    agg_rows = []
    for row in rows:
        r = row.report
        cells = [row.condition,
                 r.repeats if r else 0, row.failures,
                 _fmt(r.mse_mean if r else None),
                 std_cell(r, r.mse_std if r else None),
                 _fmt(r.mape_mean if r else None),
                 std_cell(r, r.mape_std if r else None)]
        if with_ks:
            cells.append(f"\"{row.ks_cell}\"" if row.ks_cell else "")
        agg_rows.append(cells)
    _write_csv(out / "aggregate.csv", agg_header, agg_rows)
    if ks_rows is not None:
        _write_csv(out / "ks.csv",
                   ["condition", "repeat", "variable", "d", "p_value", "stars"],
                   ks_rows)

    headers = ["k", "MSE", "MAPE"] + (["K-S vs full data"] if with_ks else [])
    table_rows = []
    for row in rows:
        if row.report is None:
            cells = [row.condition, "failed", "failed"]
        else:
            r = row.report
            cells = [row.condition,
                     format_cell(r.mse_mean, r.mse_std),
                     format_cell(r.mape_mean, r.mape_std)]
        if with_ks:
            cells.append(row.ks_cell or "")
        table_rows.append(cells)
    summary = title + "\n\n" + _render_table(headers, table_rows) + "\n"
    failures = sum(row.failures for row in rows)
    if failures:
        summary += f"\nFailed trials: {failures} (see report.csv)\n"
    (out / "summary.txt").write_text(summary, encoding="utf-8")
    return summary


def _archive_reasoning(out: Path, trials: list[Trial]) -> None:
    reasoning_dir = out / "reasoning"
    reasoning_dir.mkdir(parents=True, exist_ok=True)
    for t in trials:
        if t.reasoning:
            (reasoning_dir / _archive_name(t.condition, t.repeat)).write_text(
                t.reasoning + "\n", encoding="utf-8")


# -- runners ---------------------------------------------------------------


def _prepare(config: ExperimentConfig):
    dataset = load_dataset(config)
    schema = dataset.schema
    client = make_client(config, schema)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return dataset, schema, client, out


def run_zero_shot(config: ExperimentConfig) -> str:
    """Score every record in the dataset with no labeled examples."""
    dataset, schema, client, out = _prepare(config)
    queries = list(dataset.records)
    labels = {r.record_id: r.satisfaction for r in dataset}
    trials: list[Trial] = []
    ok: list[MetricPair] = []
    for repeat in range(1, config.repeats + 1):
        trial = Trial(condition="0 (zero-shot)", repeat=repeat)
        try:
            scores, reasoning = _score_queries(
                client, empty_support(), queries, schema, config.batch_size,
                trial_base=repeat * 10)
            trial.metrics = evaluate([labels[i] for i in scores],
                                     [scores[i] for i in scores])
            trial.reasoning = reasoning
            ok.append(trial.metrics)
        except (ParseError, TravelSatError) as exc:
            trial.status = f"failed: {exc}"
        trials.append(trial)
    rows = [SweepRow(condition="0 (zero-shot)",
                     report=aggregate_repeats(ok) if ok else None,
                     failures=config.repeats - len(ok))]
    summary = _write_sweep_artifacts(out, "Zero-shot prediction", trials, rows,
                                     with_ks=False)
    _archive_reasoning(out, trials)
    _write_provenance(out, config, "zeroshot", schema, dataset)
    return summary


def _run_support_sweep(config: ExperimentConfig, selection: str) -> str:
    """Shared few-shot sweep over support sizes.

    selection "similarity" ranks support by mean similarity to the query
    set; "random" draws it uniformly per repeat and adds per-variable K-S
    screening against the full dataset.
    """
    dataset, schema, client, out = _prepare(config)
    spec = fit_encoding(dataset)
    labels = {r.record_id: r.satisfaction for r in dataset}
    with_ks = selection == "random"

    base_split = split(dataset, config.train_fraction, seed=config.seed)
    trials: list[Trial] = []
    rows: list[SweepRow] = []
    ks_rows: list[Sequence] = []
    for k_index, k in enumerate(config.support_sizes):
        condition = _condition_label(k)
        ok: list[MetricPair] = []
        per_repeat_ks = []
        for repeat in range(1, config.repeats + 1):
            if config.vary_split:
                train, test = split(dataset, config.train_fraction,
                                    seed=config.seed + repeat)
            else:
                train, test = base_split
            if k == 0:
                support = empty_support()
            elif selection == "similarity":
                support = rank_support(train, test, spec, k)
            else:
                support = random_support(train, k,
                                         seed=config.seed * 10007 + k * 101 + repeat)
            if with_ks and support.k > 0:
                ks_results = representativeness_report(support, dataset, schema)
                per_repeat_ks.append(ks_results)
                ks_rows.extend([condition, repeat, r.variable,
                                f"{r.d:.6f}", f"{r.p_value:.6f}", r.stars]
                               for r in ks_results)
            trial = Trial(condition=condition, repeat=repeat)
            queries = list(test.records)
            try:
                scores, reasoning = _score_queries(
                    client, support, queries, schema, config.batch_size,
                    trial_base=(k_index * 1000 + repeat) * 10)
                trial.metrics = evaluate([labels[i] for i in scores],
                                         [scores[i] for i in scores])
                trial.reasoning = reasoning
                ok.append(trial.metrics)
            except (ParseError, TravelSatError) as exc:
                trial.status = f"failed: {exc}"
            trials.append(trial)
        rows.append(SweepRow(
            condition=condition,
            report=aggregate_repeats(ok) if ok else None,
            failures=config.repeats - len(ok),
            ks_cell=summarize_ks_repeats(per_repeat_ks) if (with_ks and k > 0) else
                    ("" if not with_ks else "n/a")))
    title = ("Few-shot sweep (similarity-ranked support)"
             if selection == "similarity"
             else "Few-shot sweep (random support)")
    summary = _write_sweep_artifacts(out, title, trials, rows, with_ks=with_ks,
                                     ks_rows=ks_rows if with_ks else None)
    _archive_reasoning(out, trials)
    _write_provenance(out, config,
                      "fewshot" if selection == "similarity" else "random-fewshot",
                      schema, dataset)
    return summary


def run_few_shot_sweep(config: ExperimentConfig) -> str:
    return _run_support_sweep(config, "similarity")


def run_random_sweep(config: ExperimentConfig) -> str:
    return _run_support_sweep(config, "random")


def run_baseline_sweep(config: ExperimentConfig) -> str:
    """LR and GBDT across train fractions, repeats aggregated per cell."""
    dataset, schema, _, out = _prepare(config)
    all_rows: list[Sequence] = []
    agg_rows: list[Sequence] = []
    table_rows: list[Sequence[str]] = []
    for kind in ("lr", "gbdt"):
        results = fraction_sweep(dataset, config.fractions, kind,
                                 seed=config.seed, repeats=config.repeats,
                                 hyper=config.gbdt)
        by_fraction: dict[float, list[FractionResult]] = {}
        for r in results:
            by_fraction.setdefault(r.fraction, []).append(r)
            all_rows.append([kind, format(r.fraction, "g"), r.repeat, r.status,
                             _fmt(r.metrics.mse if r.metrics else None),
                             _fmt(r.metrics.mape if r.metrics else None)])
        for fraction in config.fractions:
            cell = by_fraction[fraction]
            pairs = [r.metrics for r in cell if r.metrics is not None]
            failures = sum(1 for r in cell if r.metrics is None)
            if pairs:
                report = aggregate_repeats(pairs)
                agg_rows.append([kind, format(fraction, "g"), report.repeats, failures,
                                 _fmt(report.mse_mean),
                                 _fmt(report.mse_std) if report.mse_std is not None else "n/a",
                                 _fmt(report.mape_mean),
                                 _fmt(report.mape_std) if report.mape_std is not None else "n/a"])
                table_rows.append([kind, format(fraction, "g"),
                                   format_cell(report.mse_mean, report.mse_std),
                                   format_cell(report.mape_mean, report.mape_std)])
            else:
                agg_rows.append([kind, format(fraction, "g"), 0, failures,
                                 "", "", "", ""])
                table_rows.append([kind, format(fraction, "g"), "failed", "failed"])
    _write_csv(out / "baseline.csv",
               ["model", "fraction", "repeat", "status", "mse", "mape"], all_rows)
    _write_csv(out / "baseline_aggregate.csv",
               ["model", "fraction", "repeats_ok", "failures",
                "mse_mean", "mse_std", "mape_mean", "mape_std"], agg_rows)
    summary = ("Baseline sweep over train fractions\n\n"
               + _render_table(["model", "fraction", "MSE", "MAPE"], table_rows)
               + "\n")
    (out / "summary.txt").write_text(summary, encoding="utf-8")
    _write_provenance(out, config, "baseline-sweep", schema, dataset)
    return summary


def run_importance_study(config: ExperimentConfig) -> str:
    """Variable-importance comparison: zero-shot and few-shot LLM weights
    against GBDT split gains, with pairwise Welch tests per variable."""
    if config.repeats < 2:
        raise DatasetError("importance study needs repeats >= 2")
    dataset, schema, client, out = _prepare(config)
    spec = fit_encoding(dataset)
    train, test = split(dataset, config.train_fraction, seed=config.seed)
    probe = list(test.records[:config.batch_size])
    support = rank_support(train, test, spec, config.best_k)

    vectors: dict[str, list[dict[str, float]]] = {
        "zero_shot": [], "few_shot": [], "gbdt": []}
    failures: list[str] = []
    for repeat in range(1, config.repeats + 1):
        try:
            vectors["zero_shot"].append(_request_importance(
                client, empty_support(), probe, schema, trial_base=repeat * 10))
        except (ParseError, TravelSatError) as exc:
            failures.append(f"zero_shot repeat {repeat}: {exc}")
        try:
            vectors["few_shot"].append(_request_importance(
                client, support, probe, schema, trial_base=100000 + repeat * 10))
        except (ParseError, TravelSatError) as exc:
            failures.append(f"few_shot repeat {repeat}: {exc}")
        hyper = dataclasses.replace(config.gbdt,
                                    subsample=config.importance_subsample)
        model = fit_gbdt(encode_matrix(train, spec), train.labels(), hyper=hyper,
                         seed=config.seed + repeat,
                         column_variables=spec.column_variables())
        vectors["gbdt"].append(importance_gbdt(model))

    usable = {m: v for m, v in vectors.items() if len(v) >= 2}
    skipped = sorted(set(vectors) - set(usable))
    comparison = compare_importances(usable) if len(usable) >= 2 else None

    _write_csv(out / "importance.csv",
               ["model", "repeat", "variable", "weight"],
               [[model, i + 1, var, f"{vec[var]:.6f}"]
                for model, vecs in vectors.items()
                for i, vec in enumerate(vecs)
                for var in vec])
    lines = ["Variable importance study", ""]
    if comparison is not None:
        test_rows = []
        for (model_a, model_b), grid in comparison.tests.items():
            for var in comparison.variables:
                t = grid[var]
                test_rows.append([model_a, model_b, var,
                                  f"{t.mean_a:.6f}", f"{t.mean_b:.6f}",
                                  _fmt(t.t), _fmt(t.p_value), t.stars, t.note])
        _write_csv(out / "importance_tests.csv",
                   ["model_a", "model_b", "variable", "mean_a", "mean_b",
                    "t", "p_value", "stars", "note"], test_rows)
        mean_rows = [[var] + [f"{comparison.model_means[m][var]:.4f}"
                              for m in usable] for var in comparison.variables]
        lines.append(_render_table(["variable", *usable], mean_rows))
        lines.append("")
        for (model_a, model_b), grid in comparison.tests.items():
            flagged = [f"{v}{grid[v].stars}" for v in comparison.variables
                       if grid[v].stars]
            noted = [v for v in comparison.variables if grid[v].note]
            lines.append(f"{model_a} vs {model_b}: "
                         + ("; ".join(flagged) if flagged else "no significant differences")
                         + (f" (deterministic difference: {', '.join(noted)})" if noted else ""))
    if skipped:
        lines.append("insufficient repeats for: " + ", ".join(skipped))
    if failures:
        lines.append("")
        lines.append("Failed importance requests:")
        lines.extend(f"  {f}" for f in failures)
    summary = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(summary, encoding="utf-8")
    _write_provenance(out, config, "importance", schema, dataset)
    return summary


def write_plot_script(out: Path) -> Path | None:
    """Emit a gnuplot script for baseline_aggregate.csv, when present."""
    source = out / "baseline_aggregate.csv"
    if not source.exists():
        return None
    script = "\n".join([
        "set datafile separator ','",
        "set xlabel 'train fraction'",
        "set ylabel 'MSE'",
        "set key outside",
        "plot '< grep ^lr baseline_aggregate.csv' using 2:5 with linespoints title 'LR', \\",
        "     '< grep ^gbdt baseline_aggregate.csv' using 2:5 with linespoints title 'GBDT'",
    ]) + "\n"
    path = out / "plot.gp"
    path.write_text(script, encoding="utf-8")
    return path


def render_report(out_dir) -> str:
    """Re-read artifacts in a run directory and return its summary text."""
    out = Path(out_dir)
    summary = out / "summary.txt"
    if not summary.exists():
        raise DatasetError(f"{out}: no summary.txt; not a run directory?")
    write_plot_script(out)
    return summary.read_text(encoding="utf-8")
