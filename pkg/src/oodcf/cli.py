"""Command-line entry point wiring the pipeline.

Subcommands: `toy` (2D toy experiment: AUROC table plus SVG figures),
`run` (full tabular pipeline with multi-seed EvalRow tables), `partition`
(projection + partition search only), and `score` (per-row OOD score dump).

Configuration comes from an INI-style key=value file with sections
([dataset], [projection], [partition], [generate], [cfi], [run]); flags
override file values. Every output file embeds the resolved config for
provenance. Exit codes: 2 config, 3 data, 4 numerical.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .counterfactual import (
    CfiConfig,
    GenerationConfig,
    batch_generate,
    generate,
    select_target,
    train_softmax_classifier,
)
from .dataset import (
    LabeledDataset,
    OodRule,
    SplitSpec,
    apply_ood_rule,
    load_csv,
    make_toy,
    split,
)
from .density import (
    MahalanobisScorer,
    MarginalMahalanobisScorer,
    fit_partition_density,
    ood_scores,
)
from .errors import EXIT_CONFIG, CapExceeded, ConfigError, OodcfError
from .partition import Partition, conditional_entropy, fit_qda, search_partition
from .projection import fit_projection, project, save_projection
from .report import auroc, evaluate_run, format_table, repeat_and_aggregate
from .svgplot import ScatterPlot

ORDER_NAMES = {"nd": "non_dis_first", "dn": "dis_first"}
TOY_TRACE_POINT = (0.0, 2.0)
TOY_TRACE_TARGET = 1


@dataclass
class RunConfig:
    source: str = "toy"              # toy | csv
    data_path: str = ""
    label_col: str = ""
    ood_rule: str = ""               # class_equals:V | above_quartile:COL | equals:COL=V
    n_per_class: int = 1000
    n_ood: int = 1000
    k: int = 0                       # 0: full input dimensionality (toy: 2)
    slack: float = 0.10
    cap: int = 20
    order: str = "non_dis_first"
    alpha: float = 0.05
    max_iter: int = 500
    stop_quantile: float = 0.5
    cfi_lambda: float = 0.1
    variants: list = field(default_factory=lambda: ["full", "sg", "sn", "sd", "cfi"])
    seeds: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    train_fraction: float = 0.8
    out: str = "out"
    emit_trajectories: bool = False

    def resolved(self) -> dict:
        d = dict(vars(self))
        d["version"] = __version__
        return d

    @property
    def with_scaling(self) -> bool:
        # scaling a 2-column toy table would degenerate the PCA directions
        return self.source == "csv"

    def generation(self) -> GenerationConfig:
        return GenerationConfig(order=self.order, step_size=self.alpha,
                                max_iter=self.max_iter, stop_quantile=self.stop_quantile)

    def cfi(self) -> CfiConfig:
        return CfiConfig(lam=self.cfi_lambda, step_size=self.alpha,
                         max_iter=self.max_iter)


def parse_rule(spec: str) -> OodRule:
    """Parse an --ood-rule string.

    Grammar: 'class_equals:VALUE', 'above_quartile:COLUMN',
    or 'equals:COLUMN=VALUE'.
    """
    kind, _, rest = spec.partition(":")
    if not rest:
        raise ConfigError(f"bad --ood-rule {spec!r}; expected KIND:ARGS")
    try:
        if kind == "class_equals":
            return OodRule(kind="class_equals", value=float(rest))
        if kind == "above_quartile":
            return OodRule(kind="column_above_upper_quartile", target_column=rest)
        if kind == "equals":
            col, _, val = rest.partition("=")
            if not val:
                raise ConfigError(f"bad --ood-rule {spec!r}; equals needs COLUMN=VALUE")
            return OodRule(kind="column_equals_value", target_column=col,
                           value=float(val))
    except ValueError:
        raise ConfigError(f"bad --ood-rule {spec!r}; value must be numeric")
    raise ConfigError(f"unknown --ood-rule kind {kind!r}")


# -- config file + flags -----------------------------------------------------

_FILE_KEYS = {
    ("dataset", "source"): ("source", str),
    ("dataset", "path"): ("data_path", str),
    ("dataset", "label_col"): ("label_col", str),
    ("dataset", "ood_rule"): ("ood_rule", str),
    ("dataset", "n_per_class"): ("n_per_class", int),
    ("dataset", "n_ood"): ("n_ood", int),
    ("projection", "k"): ("k", int),
    ("partition", "slack"): ("slack", float),
    ("partition", "cap"): ("cap", int),
    ("generate", "order"): ("order", str),
    ("generate", "alpha"): ("alpha", float),
    ("generate", "max_iter"): ("max_iter", int),
    ("generate", "stop_quantile"): ("stop_quantile", float),
    ("cfi", "lambda"): ("cfi_lambda", float),
    ("run", "variants"): ("variants", lambda s: [v.strip() for v in s.split(",") if v.strip()]),
    ("run", "seeds"): ("seeds", lambda s: [int(v) for v in s.split(",") if v.strip()]),
    ("run", "train_fraction"): ("train_fraction", float),
    ("run", "out"): ("out", str),
    ("run", "emit_trajectories"): ("emit_trajectories", lambda s: s.lower() in ("1", "true", "yes")),
}


def load_config_file(path: str) -> dict:
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise ConfigError(f"cannot read config file {path!r}")
    updates = {}
    for (section, key), (attr, conv) in _FILE_KEYS.items():
        if parser.has_option(section, key):
            try:
                updates[attr] = conv(parser.get(section, key))
            except ValueError as exc:
                raise ConfigError(f"config [{section}] {key}: {exc}")
    return updates


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        for attr, value in load_config_file(args.config).items():
            setattr(cfg, attr, value)
    flag_map = {
        "data": "data_path", "label_col": "label_col", "ood_rule": "ood_rule",
        "k": "k", "slack": "slack", "cap": "cap", "alpha": "alpha",
        "max_iter": "max_iter", "stop_quantile": "stop_quantile",
        "cfi_lambda": "cfi_lambda", "train_fraction": "train_fraction",
        "out": "out", "n_per_class": "n_per_class", "n_ood": "n_ood",
    }
    for flag, attr in flag_map.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, attr, value)
    if getattr(args, "order", None):
        cfg.order = ORDER_NAMES[args.order]
    if getattr(args, "variants", None):
        cfg.variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    if getattr(args, "seeds", None):
        try:
            cfg.seeds = [int(v) for v in args.seeds.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"bad --seeds {args.seeds!r}; expected integers")
    if getattr(args, "emit_trajectories", False):
        cfg.emit_trajectories = True
    if getattr(args, "data", None):
        cfg.source = "csv"
    if not cfg.seeds:
        raise ConfigError("need at least one seed")
    return cfg


# -- datasets and fitting ----------------------------------------------------

def load_dataset(cfg: RunConfig, seed: int) -> LabeledDataset:
    if cfg.source == "toy":
        return make_toy(cfg.n_per_class, cfg.n_ood, seed)
    if not cfg.data_path or not cfg.label_col or not cfg.ood_rule:
        raise ConfigError("csv source needs --data, --label-col and --ood-rule")
    table = load_csv(cfg.data_path, cfg.label_col)
    return apply_ood_rule(table, parse_rule(cfg.ood_rule))


@dataclass
class PipelineFit:
    train: LabeledDataset
    test: LabeledDataset
    projection: object
    partition: Partition
    model: object
    Z_train: np.ndarray
    Z_eval: np.ndarray


def fit_pipeline(cfg: RunConfig, seed: int) -> PipelineFit:
    ds = load_dataset(cfg, seed)
    train, test = split(ds, SplitSpec(train_fraction=cfg.train_fraction, seed=seed))
    k = cfg.k if cfg.k > 0 else train.n_features
    if k > cfg.cap:
        raise CapExceeded(
            f"k={k} exceeds the partition-search cap {cfg.cap}; "
            "pass --k to reduce dimensionality or --cap to override")
    projection = fit_projection(train.features[~train.ood_flag], k,
                                with_scaling=cfg.with_scaling)
    Z_train = project(projection, train.features)
    id_test = test.id_rows()
    Z_eval = project(projection, id_test.features)
    part = search_partition(Z_train, train.class_label, Z_eval,
                            slack=cfg.slack, cap=cfg.cap)
    model = fit_partition_density(Z_train, train.class_label, part)
    return PipelineFit(train=train, test=test, projection=projection,
                       partition=part, model=model, Z_train=Z_train, Z_eval=Z_eval)


# -- output helpers ----------------------------------------------------------

def _provenance(cfg: RunConfig) -> str:
    return json.dumps(cfg.resolved(), sort_keys=True, separators=(",", ":"))


def write_csv(path, header, rows, cfg: RunConfig):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# config: {_provenance(cfg)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path, payload: dict, cfg: RunConfig):
    payload = {"config": cfg.resolved(), **payload}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def partition_rows(part: Partition):
    return [(r.cardinality, "|".join(map(str, r.subset)), r.loss, r.normalized,
             int(r.within_threshold), int(r.chosen)) for r in part.per_cardinality]


def print_partition(part: Partition):
    print("cardinality  subset      loss        normalized  chosen")
    for r in part.per_cardinality:
        print(f"{r.cardinality:>11}  {'|'.join(map(str, r.subset)):<10}  "
              f"{r.loss:>10.4f}  {r.normalized:>10.4f}  {'*' if r.chosen else ''}")
    print(f"z_d = {list(part.z_d)}  z_n = {list(part.z_n)}")
    for note in part.notes:
        print(f"note: {note}")


def _traj_rows(fit: PipelineFit, results, variant):
    rows = []
    W = fit.projection.loadings
    zn, zd = list(fit.partition.z_n), list(fit.partition.z_d)
    for i, res in enumerate(results):
        for trace in res.trajectories:
            Z = trace.points @ W
            ln = fit.model.non_dis.nll(Z[:, zn])
            t = res.target_class if res.target_class is not None else 0
            ld = fit.model.dis_per_class[t].nll(Z[:, zd])
            for step in range(trace.points.shape[0]):
                rows.append((i, variant, trace.phase, step,
                             *trace.points[step].tolist(),
                             float(ln[step]), float(ld[step])))
    return rows


def _counterfactual_rows(results, variant, feature_names):
    rows = []
    for i, res in enumerate(results):
        base = [i, variant,
                res.target_class if res.target_class is not None else "",
                res.error or ""]
        losses = [res.losses_before.get("non_dis", ""), res.losses_before.get("dis", ""),
                  res.losses_after.get("non_dis", ""), res.losses_after.get("dis", "")]
        rows.append(base + losses + res.x_original.tolist()
                    + res.x_counterfactual.tolist() + res.delta.tolist())
    header = (["row_id", "variant", "target_class", "error",
               "non_dis_before", "dis_before", "non_dis_after", "dis_after"]
              + [f"orig_{n}" for n in feature_names]
              + [f"cf_{n}" for n in feature_names]
              + [f"delta_{n}" for n in feature_names])
    return header, rows


# -- subcommands ---------------------------------------------------------------

def _toy_figures(cfg: RunConfig, fit: PipelineFit, out: Path):
    train = fit.train
    mean = fit.projection.standardizer.mean
    W = fit.projection.loadings
    lengths = 2.0 * np.sqrt(fit.projection.explained_variance)

    scatter = ScatterPlot(title="ID classes, OOD data, and principal components",
                          comment=f"config: {_provenance(cfg)}")
    labels = ("class 0", "class 1")
    colors = ("#1f77b4", "#2ca02c")
    for c in (0, 1):
        pts = train.features[(~train.ood_flag) & (train.class_label == c)]
        scatter.add_group(labels[c], colors[c], pts[:400])
    test_ood = fit.test.ood_rows().features
    scatter.add_group("OOD", "#d62728", test_ood[:400])
    for j in range(fit.projection.k):
        end = mean + lengths[j] * W[:, j] * fit.projection.standardizer.scale
        scatter.add_arrow(f"pc{j + 1}", "#333333", mean, end)
    scatter.write(out / "toy_scatter.svg")

    gen_base = cfg.generation()
    for order_key, order in ORDER_NAMES.items():
        gcfg = replace(gen_base, order=order, target_class=TOY_TRACE_TARGET)
        res = generate(np.array(TOY_TRACE_POINT), fit.model, fit.projection, gcfg)
        plot = ScatterPlot(
            title=f"trajectory of {TOY_TRACE_POINT}, order={order}",
            comment=f"config: {_provenance(cfg)}")
        for c in (0, 1):
            pts = train.features[(~train.ood_flag) & (train.class_label == c)]
            plot.add_group(labels[c], colors[c], pts[:400])
        plot.add_group("OOD", "#d62728", test_ood[:200])
        phase_colors = {"non_dis": "#9467bd", "dis": "#ff7f0e", "joint": "#8c564b"}
        for trace in res.trajectories:
            raw = fit.projection.standardizer.inverse_transform(trace.points)
            plot.add_polyline(f"{trace.phase} step", phase_colors[trace.phase], raw)
        plot.write(out / f"toy_trajectory_{order_key}.svg")
        if cfg.emit_trajectories:
            rows = _traj_rows(fit, [res], "full")
            header = (["row_id", "variant", "phase", "step"]
                      + [f"u_{n}" for n in train.feature_names]
                      + ["nll_non_dis", "nll_dis"])
            write_csv(out / f"toy_trajectory_{order_key}.csv", header, rows, cfg)


def cmd_toy(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.k == 0:
        cfg.k = 2

    approaches = ("Mahalanobis Distance", "Marginal Mahalanobis Distance", "Custom metric")
    per_seed = {a: [] for a in approaches}
    first_fit = None
    for seed in cfg.seeds:
        fit = fit_pipeline(cfg, seed)
        if first_fit is None:
            first_fit = fit
        id_test = fit.test.id_rows().features
        ood_test = fit.test.ood_rows().features
        Zid = project(fit.projection, id_test)
        Zood = project(fit.projection, ood_test)
        mah = MahalanobisScorer.fit(fit.Z_train, fit.train.class_label)
        marg = MarginalMahalanobisScorer.fit(fit.Z_train)
        ln_id, ld_id = ood_scores(fit.model, fit.projection, id_test)
        ln_ood, ld_ood = ood_scores(fit.model, fit.projection, ood_test)
        per_seed["Mahalanobis Distance"].append(
            auroc(-mah.score(Zid), -mah.score(Zood)))
        per_seed["Marginal Mahalanobis Distance"].append(
            auroc(-marg.score(Zid), -marg.score(Zood)))
        per_seed["Custom metric"].append(
            auroc(-(ln_id + ld_id), -(ln_ood + ld_ood)))

    rows = [(a, seed, score) for a in approaches
            for seed, score in zip(cfg.seeds, per_seed[a])]
    write_csv(out / "toy_auroc.csv", ["approach", "seed", "auroc"], rows, cfg)
    summary = [(a, float(np.mean(per_seed[a])), float(np.std(per_seed[a])), len(cfg.seeds))
               for a in approaches]
    write_csv(out / "toy_auroc_summary.csv",
              ["approach", "auroc", "auroc_std", "n_seeds"], summary, cfg)

    print("OOD approach                       AUROC")
    for a in approaches:
        print(f"{a:<33}  {np.mean(per_seed[a]):.3f}")

    # entropy / partition diagnostics for the first seed
    ent = [conditional_entropy(fit_qda(first_fit.Z_train[:, [j]],
                                       first_fit.train.class_label),
                               first_fit.Z_eval[:, [j]])
           for j in range(first_fit.projection.k)]
    for j, h in enumerate(ent):
        print(f"H[Y|pc{j + 1}] = {h:.3g} bits")
    print_partition(first_fit.partition)
    write_csv(out / "toy_partition.csv",
              ["cardinality", "subset", "loss", "normalized", "within_threshold", "chosen"],
              partition_rows(first_fit.partition), cfg)

    _toy_figures(cfg, first_fit, out)
    save_projection(first_fit.projection, out / "toy_projection.json",
                    extra={"config": cfg.resolved()})
    return 0


def _run_variant_results(cfg: RunConfig, fit: PipelineFit, variant: str, seed: int):
    ood_test = fit.test.ood_rows().features

    def density_target(x):
        return select_target(fit.model, fit.projection, x)

    if variant == "cfi":
        id_train = fit.train.id_rows()
        classifier = train_softmax_classifier(
            id_train.features, id_train.class_label, seed=seed)
        return batch_generate(ood_test, variant="cfi", classifier=classifier,
                              cfi_cfg=cfg.cfi(), target_fn=density_target)
    return batch_generate(ood_test, variant=variant, model=fit.model,
                          projection=fit.projection, cfg=cfg.generation())


def cmd_run(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    bad = [v for v in cfg.variants if v not in ("full", "sg", "sn", "sd", "cfi")]
    if bad:
        raise ConfigError(f"unknown variants {bad}")

    fits: dict[int, PipelineFit] = {}
    results_cache: dict[tuple[int, str], list] = {}

    def pipeline(seed: int) -> PipelineFit:
        if seed not in fits:
            fits[seed] = fit_pipeline(cfg, seed)
        return fits[seed]

    approach_names = {"full": "OOD CF", "sg": "OOD SG", "sn": "OOD SN",
                      "sd": "OOD SD", "cfi": "CFI"}
    aggregates = {}
    for variant in cfg.variants:
        def run_one(seed, variant=variant):
            fit = pipeline(seed)
            results = _run_variant_results(cfg, fit, variant, seed)
            results_cache[(seed, variant)] = results
            return evaluate_run(results, fit.test.id_rows().features, fit.model,
                                fit.projection, approach=approach_names[variant])

        aggregates[variant] = repeat_and_aggregate(
            run_one, cfg.seeds[0], n_seeds=len(cfg.seeds),
            approach=approach_names[variant], seeds=cfg.seeds)

    long_rows = [(approach_names[v], seed, row.non_dis, row.dis, row.l1, row.auroc)
                 for v in cfg.variants for seed, row in aggregates[v].per_seed]
    write_csv(out / "metrics.csv",
              ["approach", "seed", "non_dis", "dis", "l1", "auroc"], long_rows, cfg)
    summary_rows = [(r.mean.approach, r.mean.non_dis, r.mean.dis, r.mean.l1,
                     r.mean.auroc, r.mean.n_seeds)
                    for r in (aggregates[v] for v in cfg.variants)]
    write_csv(out / "metrics_summary.csv",
              ["approach", "non_dis", "dis", "l1", "auroc", "n_seeds"],
              summary_rows, cfg)
    write_json(out / "metrics.json", {
        "summary": [vars(aggregates[v].mean) for v in cfg.variants],
        "per_seed": {approach_names[v]: [
            {"seed": seed, **vars(row)} for seed, row in aggregates[v].per_seed]
            for v in cfg.variants},
        "std": {approach_names[v]: aggregates[v].std for v in cfg.variants},
    }, cfg)

    print(format_table([aggregates[v].mean for v in cfg.variants]))

    for seed in fits:
        fit = fits[seed]
        write_csv(out / f"partition_seed{seed}.csv",
                  ["cardinality", "subset", "loss", "normalized",
                   "within_threshold", "chosen"],
                  partition_rows(fit.partition), cfg)
        all_rows, header = [], None
        for variant in cfg.variants:
            results = results_cache[(seed, variant)]
            header, rows = _counterfactual_rows(results, approach_names[variant],
                                                fit.train.feature_names)
            all_rows.extend(rows)
        write_csv(out / f"counterfactuals_seed{seed}.csv", header, all_rows, cfg)
        if cfg.emit_trajectories:
            traj_rows = []
            for variant in cfg.variants:
                if variant == "cfi":
                    continue  # cfi iterates in the classifier's own space
                traj_rows.extend(_traj_rows(fit, results_cache[(seed, variant)],
                                            approach_names[variant]))
            theader = (["row_id", "variant", "phase", "step"]
                       + [f"u_{n}" for n in fit.train.feature_names]
                       + ["nll_non_dis", "nll_dis"])
            write_csv(out / f"trajectories_seed{seed}.csv", theader, traj_rows, cfg)
    return 0


def cmd_partition(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.source == "toy" and cfg.k == 0:
        cfg.k = 2
    fit = fit_pipeline(cfg, cfg.seeds[0])
    print_partition(fit.partition)
    write_csv(out / "partition.csv",
              ["cardinality", "subset", "loss", "normalized", "within_threshold", "chosen"],
              partition_rows(fit.partition), cfg)
    return 0


def cmd_score(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.source == "toy" and cfg.k == 0:
        cfg.k = 2
    fit = fit_pipeline(cfg, cfg.seeds[0])
    test = fit.test
    Z = project(fit.projection, test.features)
    ln, ld = ood_scores(fit.model, fit.projection, test.features)
    mah = MahalanobisScorer.fit(fit.Z_train, fit.train.class_label).score(Z)
    marg = MarginalMahalanobisScorer.fit(fit.Z_train).score(Z)
    rows = [(i, ln[i], ld[i], ln[i] + ld[i], mah[i], marg[i],
             int(test.ood_flag[i])) for i in range(test.n_rows)]
    write_csv(out / "scores.csv",
              ["row_id", "l_n", "l_d", "l_total", "mahalanobis",
               "marginal_mahalanobis", "ood_flag"], rows, cfg)
    print(f"wrote {test.n_rows} score rows to {out / 'scores.csv'}")
    return 0


# -- argument parsing ----------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI config file; flags override its values")
    p.add_argument("--data", help="CSV dataset path (switches source to csv)")
    p.add_argument("--label-col", dest="label_col", help="label column name")
    p.add_argument("--ood-rule", dest="ood_rule",
                   help="class_equals:V | above_quartile:COL | equals:COL=V")
    p.add_argument("--k", type=int, help="latent dims (0 = input dimensionality)")
    p.add_argument("--order", choices=("nd", "dn"),
                   help="step order: nd = non-dis first, dn = dis first")
    p.add_argument("--variants", help="comma list from full,sg,sn,sd,cfi")
    p.add_argument("--seeds", help="comma list of integer seeds")
    p.add_argument("--alpha", type=float, help="gradient step size")
    p.add_argument("--max-iter", dest="max_iter", type=int, help="iterations per step")
    p.add_argument("--stop-quantile", dest="stop_quantile", type=float,
                   help="ID-train NLL quantile where a step stops")
    p.add_argument("--slack", type=float, help="partition threshold slack")
    p.add_argument("--cap", type=int, help="partition search dimensionality cap")
    p.add_argument("--cfi-lambda", dest="cfi_lambda", type=float, help="CFI L1 weight")
    p.add_argument("--train-fraction", dest="train_fraction", type=float)
    p.add_argument("--n-per-class", dest="n_per_class", type=int, help="toy rows per class")
    p.add_argument("--n-ood", dest="n_ood", type=int, help="toy OOD rows")
    p.add_argument("--out", help="output directory")
    p.add_argument("--emit-trajectories", action="store_true", default=False)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oodcf",
        description="Two-step counterfactual generation for OOD tabular data. "
                    "Worker count is capped by $OODCF_THREADS.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("toy", cmd_toy), ("run", cmd_run),
                     ("partition", cmd_partition), ("score", cmd_score)):
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        return args.fn(cfg)
    except OodcfError as exc:
        record = {"error": type(exc).__name__, "message": str(exc),
                  "exit_code": getattr(exc, "exit_code", EXIT_CONFIG)}
        sys.stderr.write(json.dumps(record) + "\n")
        out_flag = getattr(args, "out", None)
        if out_flag:
            out = Path(out_flag)
            out.mkdir(parents=True, exist_ok=True)
            with open(out / "error.json", "w", encoding="utf-8") as fh:
                json.dump(record, fh, indent=1, sort_keys=True)
                fh.write("\n")
        return record["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
