"""Batch driver: synth, detect, compare, bench, eval, amcs, serve."""

from __future__ import annotations

import json
import os
import sys
import time

import click
import numpy as np

from . import model, synth
from .amcs import build_amcs, rasterize_amcs
from .baseline import KMeansConfig, featurize, kmeans, pca_reduce
from .community import LouvainConfig, detect, louvain
from .errors import FlowError
from .graph import build_csng, graph_stats, write_csng
from .metrics import weighted_jaccard
from .neighbors import NeighborQueryConfig, build_kdtree, default_rbn_radius


def _fail(message: str, code: int = 1):
    click.echo(json.dumps({"code": "bad_request", "message": message}), err=True)
    sys.exit(code)


def _neighbor_config(knn, rbn, distance, sset=None):
    if knn is not None and rbn is not None:
        _fail("--knn and --rbn are mutually exclusive")
    if rbn is not None:
        radius = rbn if rbn > 0 else (default_rbn_radius(sset) if sset else None)
        return NeighborQueryConfig("rbn", radius=radius, measure=distance)
    return NeighborQueryConfig("knn", k=knn if knn is not None else 10, measure=distance)


def _load(path, resample, min_segments):
    fmt = "text" if str(path).endswith((".txt", ".dat")) else "json"
    with open(path, "rb") as f:
        sset = model.load_streamlines(f.read(), format=fmt)
    if resample is not None:
        sset = model.resample_uniform(sset, resample)
    if min_segments is not None:
        sset = model.filter_short(sset, min_segments)
    return sset


@click.group()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=None,
              help="Worker threads for parallel phases (default: machine parallelism).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "md"]), default="json",
              show_default=True)
@click.pass_context
def main(ctx, seed, threads, fmt):
    """Streamline community exploration engine."""
    ctx.obj = {"seed": seed, "threads": threads or os.cpu_count(), "format": fmt}


@main.command("synth")
@click.argument("kind", type=click.Choice(["bundles", "vortex", "grid"]))
@click.option("--b", type=int, default=2, help="Bundle count (bundles).")
@click.option("--m", type=int, default=10, help="Lines per bundle/axis.")
@click.option("--n", type=int, default=20, help="Points per line.")
@click.option("--gap", type=float, default=100.0)
@click.option("--jitter", type=float, default=0.1)
@click.option("--spread", type=float, default=1.0)
@click.option("--c", type=int, default=2, help="Axis count (vortex).")
@click.option("--nx", type=int, default=5)
@click.option("--ny", type=int, default=5)
@click.option("--output", "-o", type=click.Path(), required=True)
@click.pass_obj
def cmd_synth(obj, kind, b, m, n, gap, jitter, spread, c, nx, ny, output):
    """Generate a labeled synthetic dataset."""
    try:
        if kind == "bundles":
            sset, labels = synth.bundles(b=b, m=m, n=n, gap=gap, jitter=jitter,
                                         spread=spread, seed=obj["seed"])
        elif kind == "vortex":
            sset, labels = synth.vortex(c=c, m=m, n=n, gap=gap, jitter=jitter,
                                        seed=obj["seed"])
        else:
            sset, labels = synth.grid(nx=nx, ny=ny, n=n, seed=obj["seed"])
    except FlowError as e:
        _fail(str(e))
    with open(output, "w") as f:
        f.write(synth.to_json(sset, labels))
    click.echo(f"wrote {sset.n_streamlines} streamlines ({sset.n_segments} segments) to {output}",
               err=True)


@main.command("detect")
@click.option("--input", "-i", type=click.Path(exists=True), required=True)
@click.option("--level", type=click.Choice(["segment", "subcurve", "streamline"]),
              default="streamline", show_default=True)
@click.option("--knn", type=int, default=None, help="kNN neighbor count.")
@click.option("--rbn", type=float, default=None,
              help="RBN radius (0 = 10% of dataset diagonal).")
@click.option("--distance", type=click.Choice(["shortest", "average", "longest"]),
              default="longest", show_default=True)
@click.option("--resolution", type=float, default=1.0, show_default=True)
@click.option("--subcurve-n", type=int, default=4, show_default=True)
@click.option("--resample", type=float, default=None)
@click.option("--min-segments", type=int, default=None)
@click.option("--output", "-o", type=click.Path(), default="partition.json", show_default=True)
@click.option("--report", type=click.Path(), default=None)
@click.option("--csng-out", type=click.Path(), default=None)
@click.pass_obj
def cmd_detect(obj, input, level, knn, rbn, distance, resolution, subcurve_n,
               resample, min_segments, output, report, csng_out):
    """Ingest, build a CSNG and run community detection."""
    try:
        t0 = time.perf_counter()
        sset = _load(input, resample, min_segments)
        t_load = time.perf_counter() - t0
        config = _neighbor_config(knn, rbn, distance, sset)
        subcurves = (model.decompose_subcurves(sset, subcurve_n)
                     if level == "subcurve" else None)
        t0 = time.perf_counter()
        g = build_csng(sset, level, config, subcurves=subcurves, threads=obj["threads"])
        t_graph = time.perf_counter() - t0
        t0 = time.perf_counter()
        partition = detect(sset, g, level, LouvainConfig(resolution=resolution,
                                                         seed=obj["seed"]))
        t_detect = time.perf_counter() - t0
    except FlowError as e:
        _fail(str(e))
    with open(output, "w") as f:
        json.dump({"level": partition.level,
                   "assignment": partition.assignment.tolist(),
                   "n_communities": partition.n_communities,
                   "modularity": partition.modularity}, f, sort_keys=True)
    if csng_out:
        write_csng(g, csng_out)
    report_doc = {"input": os.path.basename(input), "level": level,
                  "neighbor": {"strategy": config.strategy, "k": config.k,
                               "radius": config.radius, "measure": config.measure},
                  "resolution": resolution, "seed": obj["seed"],
                  "graph": graph_stats(g),
                  "n_communities": partition.n_communities,
                  "modularity": partition.modularity}
    if report:
        with open(report, "w") as f:
            json.dump(report_doc, f, sort_keys=True)
    click.echo(f"load {t_load * 1e3:.1f} ms | csng {t_graph * 1e3:.1f} ms | "
               f"detect {t_detect * 1e3:.1f} ms | {partition.n_communities} communities",
               err=True)
    click.echo(json.dumps(report_doc, sort_keys=True))


@main.command("compare")
@click.option("--input", "-i", type=click.Path(exists=True), required=True)
@click.option("--level", type=click.Choice(["segment", "streamline"]),
              default="streamline", show_default=True)
@click.option("--knn", type=int, default=None)
@click.option("--rbn", type=float, default=None)
@click.option("--distance", default="longest")
@click.option("--resolution", type=float, default=1.0)
@click.option("--kc", type=int, default=None, help="k-means cluster count (required).")
@click.option("--points-per-line", type=int, default=32, show_default=True)
@click.option("--output", "-o", type=click.Path(), default=None)
@click.pass_obj
def cmd_compare(obj, input, level, knn, rbn, distance, resolution, kc,
                points_per_line, output):
    """Louvain vs PCA k-means on identical input: runtime and Jaccard."""
    if kc is None:
        _fail("--kc is required for the PCA k-means baseline")
    try:
        sset = _load(input, None, None)
        if sset.labels is None:
            _fail("input dataset carries no ground-truth labels")
        truth = sset.labels if level == "streamline" else sset.labels[sset.seg_line]
        config = _neighbor_config(knn, rbn, distance, sset)

        g = build_csng(sset, level, config, threads=obj["threads"])
        t0 = time.perf_counter()
        p_louvain = detect(sset, g, level,
                           LouvainConfig(resolution=resolution, seed=obj["seed"]))
        t_louvain = time.perf_counter() - t0

        feats = featurize(sset, level, points_per_line)
        t0 = time.perf_counter()
        reduced, n_comp = pca_reduce(feats)
        p_kmeans, wcss, _ = kmeans(reduced, KMeansConfig(k_c=kc, seed=obj["seed"]))
        t_kmeans = time.perf_counter() - t0
    except FlowError as e:
        _fail(str(e))
    doc = {"level": level,
           "louvain": {"ms": t_louvain * 1e3, "n_communities": p_louvain.n_communities,
                       "weighted_jaccard": weighted_jaccard(p_louvain, truth)},
           "pca_kmeans": {"ms": t_kmeans * 1e3, "n_clusters": p_kmeans.n_communities,
                          "n_components": n_comp, "wcss": wcss,
                          "weighted_jaccard": weighted_jaccard(p_kmeans, truth)}}
    text = _format_compare(doc, obj["format"])
    if output:
        with open(output, "w") as f:
            f.write(text)
    click.echo(text)


def _format_compare(doc, fmt):
    if fmt == "json":
        return json.dumps(doc, sort_keys=True)
    rows = [("louvain", doc["louvain"]["ms"], doc["louvain"]["n_communities"],
             doc["louvain"]["weighted_jaccard"]),
            ("pca_kmeans", doc["pca_kmeans"]["ms"], doc["pca_kmeans"]["n_clusters"],
             doc["pca_kmeans"]["weighted_jaccard"])]
    if fmt == "csv":
        lines = ["method,ms,communities,weighted_jaccard"]
        lines += [f"{m},{ms:.2f},{n},{wj:.6f}" for m, ms, n, wj in rows]
        return "\n".join(lines)
    lines = ["| method | ms | communities | weighted Jaccard |",
             "|---|---|---|---|"]
    lines += [f"| {m} | {ms:.2f} | {n} | {wj:.6f} |" for m, ms, n, wj in rows]
    return "\n".join(lines)


@main.command("bench")
@click.option("--sizes", default="10000", show_default=True,
              help="Comma-separated target segment counts.")
@click.option("--knn", type=int, default=25, show_default=True)
@click.option("--level", default="segment", show_default=True)
@click.option("--resolution", type=float, default=0.2, show_default=True)
@click.option("--output", "-o", type=click.Path(), default=None)
@click.pass_obj
def cmd_bench(obj, sizes, knn, level, resolution, output):
    """Phase timing table over a synthetic size series."""
    rows = []
    for target in [int(s) for s in sizes.split(",")]:
        n_pts = 50
        m = max(1, target // (2 * (n_pts - 1)))
        t0 = time.perf_counter()
        sset, _ = synth.bundles(b=2, m=m, n=n_pts, gap=50.0, jitter=0.1,
                                spread=5.0, seed=obj["seed"])
        doc = synth.to_json(sset)
        sset = model.load_streamlines(doc)
        t_data = time.perf_counter() - t0

        t0 = time.perf_counter()
        tree = build_kdtree(sset, level)
        t_tree = time.perf_counter() - t0

        config = NeighborQueryConfig("knn", k=knn, measure="longest")
        t0 = time.perf_counter()
        g = build_csng(sset, level, config, threads=obj["threads"])
        t_knn = time.perf_counter() - t0

        t0 = time.perf_counter()
        p = detect(sset, g, level, LouvainConfig(resolution=resolution, seed=obj["seed"]))
        t_detect = time.perf_counter() - t0
        rows.append({"segments": sset.n_segments, "data_ms": t_data * 1e3,
                     "kdtree_ms": t_tree * 1e3, "knn_ms": t_knn * 1e3,
                     "detect_ms": t_detect * 1e3, "communities": p.n_communities})
    header = ["segments", "data_ms", "kdtree_ms", "knn_ms", "detect_ms", "communities"]
    csv_lines = [",".join(header)]
    md_lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for r in rows:
        vals = [f"{r[h]:.1f}" if isinstance(r[h], float) else str(r[h]) for h in header]
        csv_lines.append(",".join(vals))
        md_lines.append("| " + " | ".join(vals) + " |")
    text = "\n".join(csv_lines) + "\n\n" + "\n".join(md_lines)
    if output:
        with open(output, "w") as f:
            f.write(text)
    click.echo(text)


@main.command("eval")
@click.option("--input", "-i", type=click.Path(exists=True), required=True)
@click.option("--partition", "-p", type=click.Path(exists=True), required=True)
@click.pass_obj
def cmd_eval(obj, input, partition):
    """Weighted Jaccard of a saved partition against dataset labels."""
    try:
        sset = _load(input, None, None)
        if sset.labels is None:
            _fail("input dataset carries no ground-truth labels")
        with open(partition) as f:
            pdoc = json.load(f)
        from .community import Partition
        p = Partition(pdoc["level"], np.asarray(pdoc["assignment"], dtype=np.int32),
                      pdoc["n_communities"], pdoc.get("modularity", 0.0))
        truth = sset.labels if p.level == "streamline" else sset.labels[sset.seg_line]
        wj = weighted_jaccard(p, truth)
    except FlowError as e:
        _fail(str(e))
    click.echo(json.dumps({"weighted_jaccard": wj,
                           "n_communities": p.n_communities}, sort_keys=True))


@main.command("amcs")
@click.option("--input", "-i", type=click.Path(exists=True), required=True)
@click.option("--knn", type=int, default=None)
@click.option("--rbn", type=float, default=None)
@click.option("--distance", default="longest")
@click.option("--resolution", type=float, default=0.2)
@click.option("--community", type=int, default=None,
              help="Segment community to visualize (default: largest).")
@click.option("--full", is_flag=True, help="Whole-dataset matrix (guarded by --max-pixels).")
@click.option("--max-pixels", type=int, default=512, show_default=True)
@click.option("--palette", type=click.Choice(["gray", "heat"]), default="gray")
@click.option("--output", "-o", type=click.Path(), default="amcs.ppm", show_default=True)
@click.option("--matrix-out", type=click.Path(), default=None)
@click.pass_obj
def cmd_amcs(obj, input, knn, rbn, distance, resolution, community, full,
             max_pixels, palette, output, matrix_out):
    """Render the adjacency matrix of a detected segment community."""
    try:
        sset = _load(input, None, None)
        config = _neighbor_config(knn, rbn, distance, sset)
        g = build_csng(sset, "segment", config, threads=obj["threads"])
        if full:
            members = np.arange(sset.n_segments)
        else:
            p = detect(sset, g, "segment",
                       LouvainConfig(resolution=resolution, seed=obj["seed"]))
            cid = community
            if cid is None:
                cid = int(np.argmax(np.bincount(p.assignment)))
            members = np.nonzero(p.assignment == cid)[0]
        m = build_amcs(g, members, sset)
        ppm = rasterize_amcs(m, max_pixels=max_pixels, palette=palette)
    except FlowError as e:
        _fail(str(e))
    with open(output, "wb") as f:
        f.write(ppm)
    if matrix_out:
        with open(matrix_out, "w") as f:
            json.dump(m.to_json(), f, sort_keys=True)
    click.echo(f"{m.n}x{m.n} matrix, {len(m.entries)} entries, "
               f"symmetric={m.symmetric} -> {output}", err=True)


@main.command("serve")
@click.option("--listen", default=None, help="host:port (default 127.0.0.1:8080).")
@click.option("--cors-origin", default=None)
@click.option("--size-cap", type=int, default=512 * 1024 * 1024, show_default=True)
def cmd_serve(listen, cors_origin, size_cap):
    """Run the HTTP/JSON service until terminated."""
    import uvicorn

    from .service import AppState, create_app

    listen = listen or os.environ.get("FLOWCOMM_LISTEN", "127.0.0.1:8080")
    host, _, port = listen.rpartition(":")
    app = create_app(AppState(size_cap=size_cap), cors_origin=cors_origin)
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    except OSError as e:
        _fail(f"cannot bind {listen}: {e}", code=3)


if __name__ == "__main__":
    main()
