"""Command-line entry point: ``enot gen-data | train | transport | benchmark | oracle | plot``.

Exit codes: 0 success, 1 usage or I/O error, 2 numerical abort, 3 every
benchmark cell failed.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import sys
from contextlib import contextmanager
from pathlib import Path

import click
import numpy as np

from .cost import EnCost
from .ctransform import InnerConfig
from .gmm import (
    BENCHMARK_TRAIN,
    BenchmarkGrid,
    GmmSpec,
    gmm_nll,
    padded_pair,
    paper_gmm_pair,
    run_benchmark,
    sample_gmm,
    write_manifest,
    write_results,
)
from .oracle import translation_experiment, weak_duality_check
from .potential import NonFiniteError, init_net, load_net, save_net
from .trainer import TrainConfig, train_potential
from .transport import saliency_from_report, transport_batch

log = logging.getLogger("enot")

EXIT_IO = 1
EXIT_NUMERIC = 2
EXIT_ALL_FAILED = 3
LOCK_NAME = ".enot.lock"


class DataError(click.ClickException):
    exit_code = EXIT_IO


class NumericAbort(click.ClickException):
    exit_code = EXIT_NUMERIC


# CSV / JSON I/O ---------------------------------------------------------------


def read_dataset(path) -> np.ndarray:
    """Read a ``f0,...,f{d-1}`` CSV. Ragged or non-numeric rows are reported by line number."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"data file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file, expected a header row")
        d = len(header)
        rows = []
        for row in reader:
            if not row:
                continue
            if len(row) != d:
                raise DataError(f"{path}:{reader.line_num}: expected {d} columns, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise DataError(f"{path}:{reader.line_num}: non-numeric value in row") from None
    return np.array(rows, dtype=np.float64).reshape(len(rows), d)


def write_dataset(path, data: np.ndarray, fmt=repr) -> None:
    data = np.asarray(data)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"f{i}" for i in range(data.shape[1])])
        for row in data:
            w.writerow([fmt(v.item()) for v in row])


def write_json(path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise DataError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None


@contextmanager
def locked_dir(out):
    """Create ``out`` and hold an exclusive lock file in it for the duration."""
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        fd = os.open(out / LOCK_NAME, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise DataError(f"output directory {out} is locked by another run ({LOCK_NAME} exists)") from None
    except OSError as exc:
        raise DataError(f"cannot write to {out}: {exc}") from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield out
    finally:
        (out / LOCK_NAME).unlink(missing_ok=True)


# Shared options -----------------------------------------------------------------

INNER_KEYS = {"inner_iters": "iterations", "inner_step": "step", "inner_max_radius": "max_radius"}


def shared_options(f):
    opts = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON config with flat keys."),
        click.option("--seed", type=int, default=None, help="Seed for every stochastic step."),
        click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory."),
        click.option("--c1", type=float, default=None, help="L1 cost coefficient."),
        click.option("--c2", type=float, default=None, help="Quadratic cost coefficient."),
        click.option("--inner-iters", type=int, default=None, help="c-transform iterations."),
        click.option("--inner-step", type=float, default=None, help="c-transform initial step."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def resolve(config_path, **flags) -> dict:
    """Config file values overridden by any flag that was given."""
    doc = read_json(config_path) if config_path else {}
    if not isinstance(doc, dict):
        raise DataError("config file must hold a JSON object")
    for k, v in flags.items():
        if v is not None:
            doc[k] = v
    return doc


def cost_from(doc: dict) -> EnCost:
    try:
        return EnCost(c2=float(doc.get("c2", 1e-6)), c1=float(doc.get("c1", 0.0)))
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None


def inner_from(doc: dict, defaults: InnerConfig | None = None) -> InnerConfig:
    base = {**(defaults.to_dict() if defaults else {}), **doc.get("inner", {})}
    for flat, key in INNER_KEYS.items():
        if doc.get(flat) is not None:
            base[key] = doc[flat]
    try:
        return InnerConfig.from_dict(base)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None


TRAIN_KEYS = set(TrainConfig.__dataclass_fields__) - {"inner"}


def train_from(doc: dict) -> TrainConfig:
    """Training config: the stable benchmark settings, overridden by ``doc``."""
    fields = {k: v for k, v in BENCHMARK_TRAIN.to_dict().items() if k != "inner"}
    fields.update({k: doc[k] for k in TRAIN_KEYS if doc.get(k) is not None})
    fields["inner"] = inner_from(doc, BENCHMARK_TRAIN.inner).to_dict()
    try:
        return TrainConfig.from_dict(fields)
    except (TypeError, ValueError) as exc:
        raise click.UsageError(f"bad training config: {exc}") from None


# Commands -------------------------------------------------------------------------


@click.group()
@click.option("-v", "--verbose", count=True, help="Repeat for more logging.")
def cli(verbose):
    """Elastic-net optimal transport with neural dual potentials."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@cli.command("gen-data")
@shared_options
@click.option("--dim", type=int, default=None, help="Dimension of the GMM pair.")
@click.option("--n", "n", type=int, default=None, help="Rows per domain.")
@click.option("--padded", is_flag=True, help="Append uniform noise coordinates.")
@click.option("--signal-dim", type=int, default=None)
@click.option("--noise-dim", type=int, default=None)
def gen_data(config_path, seed, out, c1, c2, inner_iters, inner_step, dim, n, padded, signal_dim, noise_dim):
    """Sample source.csv and target.csv from the bimodal GMM pair."""
    doc = resolve(config_path, seed=seed, out=out, dim=dim, n=n, signal_dim=signal_dim, noise_dim=noise_dim)
    seed = int(doc.get("seed", 0))
    n = int(doc.get("n", 2000))
    if n < 1:
        raise click.UsageError("--n must be positive")
    with locked_dir(doc.get("out", ".")) as outdir:
        if padded or doc.get("padded"):
            ds, dn = int(doc.get("signal_dim", 10)), int(doc.get("noise_dim", 10))
            if ds < 2 or dn < 0:
                raise click.UsageError("need --signal-dim >= 2 and --noise-dim >= 0")
            src, tgt, noise = padded_pair(ds, dn, seed, n)
            write_json(outdir / "noise_indices.json", noise)
            specs = paper_gmm_pair(ds)
        else:
            d = int(doc.get("dim", 10))
            if d < 2:
                raise click.UsageError("--dim must be >= 2")
            specs = paper_gmm_pair(d)
            ss = np.random.SeedSequence(seed).spawn(2)
            src, tgt = sample_gmm(specs[0], n, ss[0]), sample_gmm(specs[1], n, ss[1])
        write_dataset(outdir / "source.csv", src)
        write_dataset(outdir / "target.csv", tgt)
        write_json(outdir / "source_spec.json", specs[0].to_dict())
        write_json(outdir / "target_spec.json", specs[1].to_dict())
    click.echo(f"wrote {n} x {src.shape[1]} samples per domain to {outdir}")


@cli.command()
@shared_options
@click.option("--source", type=click.Path(dir_okay=False), required=True)
@click.option("--target", type=click.Path(dir_okay=False), required=True)
@click.option("--iterations", "outer_iterations", type=int, default=None, help="Outer iterations.")
@click.option("--batch-size", type=int, default=None)
@click.option("--lr", "step", type=float, default=None, help="Outer step size (default 1e-4).")
@click.option("--hidden-layers", type=int, default=None)
@click.option("--width", "hidden_width", type=int, default=None)
def train(config_path, seed, out, c1, c2, inner_iters, inner_step, source, target, **train_flags):
    """Fit a potential network; writes net.json, train_log.csv and run_config.json."""
    doc = resolve(config_path, seed=seed, out=out, c1=c1, c2=c2, inner_iters=inner_iters,
                  inner_step=inner_step, **train_flags)
    cost, cfg = cost_from(doc), train_from(doc)
    src, tgt = read_dataset(source), read_dataset(target)
    if src.shape[1] != tgt.shape[1]:
        raise DataError(f"source has {src.shape[1]} columns, target has {tgt.shape[1]}")
    if src.shape[0] == 0 or tgt.shape[0] == 0:
        raise DataError("training data must be nonempty")
    with locked_dir(doc.get("out", ".")) as outdir:
        try:
            net, tlog = train_potential(src, tgt, cost, cfg)
        except NonFiniteError as exc:
            raise NumericAbort(f"training aborted: {exc}") from None
        save_net(net, outdir / "net.json")
        tlog.write_csv(outdir / "train_log.csv")
        write_json(outdir / "run_config.json", {"cost": cost.to_dict(), "train": cfg.to_dict(),
                                                "source": str(source), "target": str(target)})
    click.echo(f"final dual estimate {tlog.dual_estimate[-1]:.6g}; wrote {outdir / 'net.json'}")


@cli.command()
@shared_options
@click.option("--net", "net_path", type=click.Path(dir_okay=False), required=True)
@click.option("--data", type=click.Path(dir_okay=False), required=True)
@click.option("--saliency", is_flag=True, help="Also write ranked saliency.csv.")
@click.option("--gmm-spec", type=click.Path(dir_okay=False), default=None, help="Target GmmSpec JSON for NLL.")
def transport(config_path, seed, out, c1, c2, inner_iters, inner_step, net_path, data, saliency, gmm_spec):
    """Apply the map; writes transported.csv, masks.csv and summary.json."""
    doc = resolve(config_path, out=out, c1=c1, c2=c2)
    run_cfg = Path(net_path).with_name("run_config.json")
    if ("c1" not in doc or "c2" not in doc) and run_cfg.is_file():
        doc = {**read_json(run_cfg)["cost"], **doc}
    cost = cost_from(doc)
    try:
        net = load_net(net_path)
    except FileNotFoundError:
        raise DataError(f"net file not found: {net_path}") from None
    xs = read_dataset(data)
    if xs.shape[0] and xs.shape[1] != net.input_dim:
        raise DataError(f"net expects {net.input_dim} columns, {data} has {xs.shape[1]}")
    if xs.shape[0] == 0:
        xs = np.zeros((0, net.input_dim))
    try:
        report = transport_batch(net, xs, cost)
    except NonFiniteError as exc:
        raise NumericAbort(str(exc)) from None
    summary = report.summary()
    summary["cost"] = cost.to_dict()
    if gmm_spec and xs.shape[0]:
        summary["nll"] = gmm_nll(GmmSpec.from_dict(read_json(gmm_spec)), report.transported)
    with locked_dir(doc.get("out", ".")) as outdir:
        write_dataset(outdir / "transported.csv", report.transported)
        write_dataset(outdir / "masks.csv", report.masks, fmt=str)
        write_json(outdir / "summary.json", summary)
        if saliency:
            with open(outdir / "saliency.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["rank", "feature", "frequency", "mean_abs_grad"])
                if xs.shape[0]:
                    for rank, row in enumerate(saliency_from_report(report)):
                        w.writerow([rank, row.feature, repr(row.frequency), repr(row.mean_abs_grad)])
    click.echo(f"transported {xs.shape[0]} rows; mean sparsity {summary['mean_sparsity']:.3f}")


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


@cli.command()
@shared_options
@click.option("--dims", default=None, help="Comma-separated dimensions (default 10).")
@click.option("--coefs", default=None, help="Comma-separated L1 coefficients (default 0,1e-2,5e-2).")
@click.option("--depths", default=None, help="Comma-separated hidden-layer counts (default 4).")
@click.option("--n-samples", type=int, default=None)
@click.option("--iterations", "outer_iterations", type=int, default=None)
@click.option("--include-large", is_flag=True, help="Run cells with d > 100.")
@click.option("--full-grid", is_flag=True, help="Run the full coefficient grid instead of the small one.")
def benchmark(config_path, seed, out, c1, c2, inner_iters, inner_step, dims, coefs, depths, n_samples,
              outer_iterations, include_large, full_grid):
    """Run the GMM coefficient grid; writes results.csv and manifest.json."""
    doc = resolve(config_path, seed=seed, out=out, c2=c2, inner_iters=inner_iters, inner_step=inner_step,
                  outer_iterations=outer_iterations)
    grid_doc = {} if full_grid else {"dims": [10], "l1_coefficients": [0.0, 1e-2, 5e-2], "hidden_layer_counts": [4]}
    grid_doc.update(doc.get("grid", {}))
    for key, val, parse in (("dims", dims, _int_list), ("l1_coefficients", coefs, _float_list),
                            ("hidden_layer_counts", depths, _int_list)):
        if val is not None:
            try:
                grid_doc[key] = parse(val)
            except ValueError:
                raise click.UsageError(f"cannot parse list {val!r}") from None
    if c1 is not None:
        grid_doc["l1_coefficients"] = [c1]
    for key in ("seed", "c2"):
        if doc.get(key) is not None:
            grid_doc[key] = doc[key]
    if n_samples is not None:
        grid_doc["n_samples"] = n_samples
    if include_large:
        grid_doc["include_large"] = True
    train_doc = dict(grid_doc.pop("train", BenchmarkGrid().train.to_dict()))
    if doc.get("outer_iterations") is not None:
        train_doc["outer_iterations"] = doc["outer_iterations"]
    inner = inner_from({**doc, "inner": train_doc.get("inner", {})})
    train_doc["inner"] = inner.to_dict()
    try:
        grid = BenchmarkGrid.from_dict({**grid_doc, "train": train_doc})
    except (TypeError, ValueError) as exc:
        raise click.UsageError(f"bad grid config: {exc}") from None

    def progress(row):
        status = row["error"] or f"test NLL {row['test_nll']:.4g}"
        click.echo(f"d={row['dim']} depth={row['depth']} c1={row['c1']:g}: {status}")

    with locked_dir(doc.get("out", ".")) as outdir:
        rows = run_benchmark(grid, progress)
        write_results(rows, outdir / "results.csv")
        write_manifest(grid, outdir / "manifest.json")
    failed = sum(1 for r in rows if r["error"])
    if rows and failed == len(rows):
        click.echo("every benchmark cell failed", err=True)
        sys.exit(EXIT_ALL_FAILED)
    click.echo(f"{len(rows) - failed}/{len(rows)} cells succeeded")


@cli.command()
@shared_options
@click.option("--trials", type=int, default=20, help="Random nets for the weak-duality check.")
@click.option("--n", "n", type=int, default=8, help="Points per empirical measure.")
@click.option("--net", "net_path", type=click.Path(dir_okay=False), default=None, help="Check this net instead.")
@click.option("--source", type=click.Path(dir_okay=False), default=None)
@click.option("--target", type=click.Path(dir_okay=False), default=None)
@click.option("--translation/--no-translation", default=True, help="Run the trained translation check.")
@click.option("--theory", is_flag=True, help="Also run the grid weak-concavity checks.")
def oracle(config_path, seed, out, c1, c2, inner_iters, inner_step, trials, n, net_path, source, target,
           translation, theory):
    """Weak duality against exact matching, the translation oracle and optional theory checks."""
    doc = resolve(config_path, seed=seed, out=out, c1=c1, c2=c2, inner_iters=inner_iters, inner_step=inner_step)
    seed = int(doc.get("seed", 0))
    inner = inner_from(doc)
    report = {"seed": seed}
    ok = True
    if net_path or source or target:
        if not (net_path and source and target):
            raise click.UsageError("--net, --source and --target go together")
        cost = cost_from(doc)
        xs, ys = read_dataset(source), read_dataset(target)
        try:
            rep = weak_duality_check(load_net(net_path), xs, ys, cost, inner)
        except FileNotFoundError:
            raise DataError(f"net file not found: {net_path}") from None
        except ValueError as exc:
            raise DataError(str(exc)) from None
        report["weak_duality"] = [rep.to_dict()]
        ok &= rep.holds
    else:
        cost = EnCost(float(doc.get("c2", 0.5)), float(doc.get("c1", 0.1)))
        rng = np.random.default_rng(seed)
        checks = []
        for t in range(trials):
            net = init_net(2, int(rng.integers(1, 4)), 8, seed=int(rng.integers(2**31)))
            xs, ys = rng.standard_normal((n, 2)), rng.standard_normal((n, 2)) + 1.0
            checks.append(weak_duality_check(net, xs, ys, cost, inner).to_dict())
        report["weak_duality"] = checks
        ok &= all(c["holds"] for c in checks)
    if translation:
        tcost = EnCost(1e-6, 1e-2)
        try:
            tr = translation_experiment(tcost, seed=seed)
        except NonFiniteError as exc:
            raise NumericAbort(str(exc)) from None
        report["translation"] = {**tr.to_dict(), "holds": tr.relative_gap <= 0.1 and tr.mean_map_error <= 0.5}
        ok &= report["translation"]["holds"]
    if theory:
        report["theory"] = run_theory_suite(seed)
        ok &= all(r["violations"] == 0 for r in report["theory"])
    report["all_hold"] = bool(ok)
    with locked_dir(doc.get("out", ".")) as outdir:
        write_json(outdir / "oracle_report.json", report)
    click.echo("all checks hold" if ok else "some checks FAILED")
    if not ok:
        sys.exit(EXIT_IO)


def run_theory_suite(seed: int, grids: int = 3) -> list[dict]:
    from .theory import grid_c_transform, rough_psi, weak_concavity_check

    out = []
    rng = np.random.default_rng(seed)
    for d, res in ((1, 256), (2, 64)):
        for k in range(grids):
            cost = EnCost(float(rng.uniform(0.1, 2.0)), float(rng.uniform(0.0, 1.0)))
            phi = grid_c_transform(rough_psi(d, res, seed=int(rng.integers(2**31))), cost)
            rep = weak_concavity_check(phi, cost, 1000, seed=int(rng.integers(2**31)))
            out.append({**rep.to_dict(), "cost": cost.to_dict()})
    return out


# Plots -------------------------------------------------------------------------------

SVG_W, SVG_H, PAD = 480, 360, 40
COLORS = {"source": "#1f77b4", "target": "#ff7f0e", "transported": "#2ca02c"}


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def scatter_svg(sets: dict, i: int, j: int) -> str:
    pts = np.vstack([s[:, [i, j]] for s in sets.values() if len(s)]) if any(len(s) for s in sets.values()) \
        else np.zeros((1, 2))
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)

    def to_px(p):
        x = PAD + (p[0] - lo[0]) / span[0] * (SVG_W - 2 * PAD)
        y = SVG_H - PAD - (p[1] - lo[1]) / span[1] * (SVG_H - 2 * PAD)
        return _fmt(x), _fmt(y)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" '
             f'viewBox="0 0 {SVG_W} {SVG_H}">',
             f'<rect width="{SVG_W}" height="{SVG_H}" fill="white"/>',
             f'<text x="{PAD}" y="20" font-size="12">f{i} vs f{j}</text>']
    for k, (name, data) in enumerate(sets.items()):
        color = COLORS.get(name, "#7f7f7f")
        parts.append(f'<g class="{name}" fill="{color}" fill-opacity="0.6">')
        for p in data:
            x, y = to_px(p[[i, j]])
            parts.append(f'<circle cx="{x}" cy="{y}" r="2"/>')
        parts.append("</g>")
        parts.append(f'<text x="{SVG_W - 120}" y="{20 + 14 * k}" font-size="12" fill="{color}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def bar_svg(freqs, labels) -> str:
    n = len(freqs)
    width = (SVG_W - 2 * PAD) / max(n, 1)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" '
             f'viewBox="0 0 {SVG_W} {SVG_H}">',
             f'<rect width="{SVG_W}" height="{SVG_H}" fill="white"/>',
             f'<text x="{PAD}" y="20" font-size="12">selection frequency</text>']
    for k, (f, lab) in enumerate(zip(freqs, labels)):
        h = float(np.clip(f, 0.0, 1.0)) * (SVG_H - 2 * PAD)
        x = PAD + k * width
        parts.append(f'<rect class="bar" x="{_fmt(x)}" y="{_fmt(SVG_H - PAD - h)}" width="{_fmt(0.9 * width)}" '
                     f'height="{_fmt(h)}" fill="#1f77b4"><title>{lab}: {f:.4f}</title></rect>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


@cli.command()
@click.option("--source", type=click.Path(dir_okay=False), default=None)
@click.option("--target", type=click.Path(dir_okay=False), default=None)
@click.option("--transported", type=click.Path(dir_okay=False), default=None)
@click.option("--saliency", type=click.Path(dir_okay=False), default=None, help="saliency.csv or masks.csv")
@click.option("--pair", default="0,1", help="Two coordinates for the scatter plot.")
@click.option("--out", type=click.Path(file_okay=False), default=".")
def plot(source, target, transported, saliency, pair, out):
    """Scatter of source/target/transported points and a selection-frequency bar chart."""
    if not (source or target or transported or saliency):
        raise click.UsageError("nothing to plot")
    try:
        i, j = _int_list(pair)
    except ValueError:
        raise click.UsageError("--pair takes two comma-separated indices") from None
    written = []
    with locked_dir(out) as outdir:
        sets = {name: read_dataset(p) for name, p in
                (("source", source), ("target", target), ("transported", transported)) if p}
        if sets:
            d = min(s.shape[1] for s in sets.values())
            if d < 2:
                raise DataError("scatter plot needs at least 2 dimensions")
            if not (0 <= i < d and 0 <= j < d):
                raise click.UsageError(f"--pair indices must lie in [0, {d})")
            (outdir / "scatter.svg").write_text(scatter_svg(sets, i, j))
            written.append("scatter.svg")
        if saliency:
            freqs, labels = _selection_frequencies(saliency)
            (outdir / "selection.svg").write_text(bar_svg(freqs, labels))
            written.append("selection.svg")
    click.echo("wrote " + ", ".join(written))


def _selection_frequencies(path):
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), [])
    if "frequency" in header:
        with open(path, newline="") as fh:
            rows = sorted(csv.DictReader(fh), key=lambda r: int(r["feature"]))
        return [float(r["frequency"]) for r in rows], [f"f{r['feature']}" for r in rows]
    masks = read_dataset(path)
    freqs = masks.mean(axis=0) if masks.shape[0] else np.zeros(masks.shape[1])
    return freqs.tolist(), [f"f{k}" for k in range(masks.shape[1])]


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="enot", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_IO
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code if isinstance(exc, (DataError, NumericAbort)) else EXIT_IO
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_IO
    except NonFiniteError as exc:
        click.echo(f"Error: numerical abort: {exc}", err=True)
        return EXIT_NUMERIC
    except OSError as exc:
        click.echo(f"Error: {exc}", err=True)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
