"""Acceptance suite.

Each test prints one ``[acceptance N] PASS|FAIL|SKIP: ...`` line (also
repeated in the pytest terminal summary). Criteria that need the public
datasets look for them under ``$FFDLT_DATA_DIR`` and are skipped, with the
reason printed, when the files are missing. Synthetic stand-ins of the same
size are run alongside as supplementary evidence; their lines are tagged
``SUPPLEMENTARY`` and never replace the real check.
"""
import math
import os
import time

import numpy as np
import pytest

from ffdlt.cli import dataset_stats
from ffdlt.config import build_config
from ffdlt.dynamics import ModelParams, NodeParams, State, activation_threshold, quiescence_duration
from ffdlt.engine import available_backends, run_noncompetitive, run_nonprogressive, run_semiprogressive
from ffdlt.experiment import build_summary, execute_runs, prepare_context, run_experiment
from ffdlt.graph import parse_edge_list, restrict_for_diffusion
from ffdlt.metrics import spread_series
from ffdlt.synthetic import signed_network, wiki_vote_like, write_konect

from conftest import U, V, X, Z
from test_engine import random_instance, replay_check
from test_oracle_equivalence import compare, random_case

DATA_ENV = "FFDLT_DATA_DIR"
SLACK = 0.05
WORKERS = max(1, os.cpu_count() or 1)

# name -> (candidate file names, format, nodes, edges, % negative, strong LCC (nodes, edges) or None)
DATASETS = {
    "epinions": (("soc-sign-epinions.txt", "soc-sign-epinions.txt.gz"), "snap-signed",
                 131_828, 841_372, 14.7, (36_490, 602_722)),
    "slashdot": (("soc-sign-Slashdot090221.txt", "soc-sign-Slashdot090221.txt.gz"), "snap-signed",
                 77_350, 516_575, 23.3, (23_217, 243_600)),
    "wiki-conflict": (("out.wikiconflict", "out.wikiconflict.gz"), "konect-timestamped",
                      116_836, 2_027_871, 61.9, None),
    "wiki-vote": (("out.elec", "out.elec.gz"), "konect-timestamped",
                  7_118, 103_675, 21.6, (1_178, 31_572)),
}


def find_dataset(name):
    root = os.environ.get(DATA_ENV)
    if not root:
        return None
    for fname in DATASETS[name][0]:
        path = os.path.join(root, fname)
        if os.path.exists(path):
            return path
    return None


def missing_reason(names):
    root = os.environ.get(DATA_ENV)
    files = ", ".join(DATASETS[n][0][0] for n in names)
    if not root:
        return f"${DATA_ENV} is not set (needs {files})"
    return f"dataset file(s) not found under {root} (needs {files})"


def within(got, want, tol=0.02):
    return abs(got - want) <= tol * want


# ---- 1. dataset statistics ------------------------------------------------------------


@pytest.mark.parametrize("name", list(DATASETS))
def test_1_dataset_statistics(name, acceptance):
    path = find_dataset(name)
    if path is None:
        reason = missing_reason([name])
        acceptance(f"1/{name}", "SKIP", reason)
        pytest.skip(reason)
    _, fmt, nodes, edges, neg_pct, lcc = DATASETS[name]
    start = time.perf_counter()
    s = dataset_stats(path, fmt)
    elapsed = time.perf_counter() - start
    checks = {
        "nodes": within(s["nodes"], nodes),
        "edges": within(s["edges"], edges),
        "negative edges": within(s["negative_pct"] * s["edges"], neg_pct * edges),
        "runtime < 120 s": elapsed < 120,
    }
    if lcc is not None:
        checks["LCC nodes"] = within(s["lcc_nodes"], lcc[0])
        checks["LCC edges"] = within(s["lcc_edges"], lcc[1])
    ok = all(checks.values())
    detail = (f"{s['nodes']} nodes / {s['edges']} edges / {s['negative_pct']:.1f}% negative, "
              f"LCC {s['lcc_nodes']}/{s['lcc_edges']}, {elapsed:.1f}s"
              + ("" if ok else f"; failed: {[k for k, v in checks.items() if not v]}"))
    acceptance(f"1/{name}", "PASS" if ok else "FAIL", detail)
    assert ok, detail


# ---- 2. worked example ------------------------------------------------------------------


def test_2_worked_example(four_node, acceptance):
    g, params = four_node
    mp = ModelParams(horizon=3)
    start = time.perf_counter()
    results = {}
    for backend in available_backends():
        nc = run_noncompetitive(g, [U, Z], params, mp, backend=backend)
        sp = run_semiprogressive(g, [X], [U, Z], 0, params, mp, backend=backend)
        npt = run_nonprogressive(g, [X], [U, Z], 0, params, mp, backend=backend)
        again = run_nonprogressive(g, [X], [U, Z], 0, params, mp, backend=backend)
        results[backend] = {
            "NC v active at t=1": (1, V, "activate", "A") in nc.event_tuples() and V in nc.active(1),
            "SP z switches at t=1": (1, Z, "switch", "A") in sp.event_tuples(),
            "SP v keeps green at t=2": V in sp.active(2, 1),
            "NP v deactivates at t=2": (2, V, "deactivate", "B") in npt.event_tuples(),
            "deterministic": npt.dumps() == again.dumps(),
        }
    elapsed = time.perf_counter() - start
    failed = [f"{b}: {k}" for b, r in results.items() for k, v in r.items() if not v]
    ok = not failed and elapsed < 1.0
    acceptance(2, "PASS" if ok else "FAIL",
               f"3 examples on backends {sorted(results)} in {elapsed * 1000:.0f} ms"
               + (f"; failed: {failed}" if failed else ""))
    assert ok


# ---- 3. oracle equivalence ---------------------------------------------------------------


@pytest.mark.slow
@pytest.mark.parametrize("backend", available_backends())
def test_3_oracle_equivalence(backend, acceptance):
    rng = np.random.default_rng(3)
    n_cases = 10_000
    mismatches = [i for i in range(n_cases) if not compare(**random_case(rng), backend=backend)]
    ok = not mismatches
    acceptance(f"3/{backend}", "PASS" if ok else "FAIL",
               f"{n_cases} random instances (n <= 6), {len(mismatches)} mismatches")
    assert ok, mismatches[:5]


# ---- 4. invariant suites ------------------------------------------------------------------


def test_4_invariants(acceptance):
    instances = 100
    results = {}

    ok = True
    for seed in range(instances):
        g, params, sa, _, _ = random_instance(seed)
        mp = ModelParams(lam=[0.0, 5.0][seed % 2], horizon=60)
        tr = run_noncompetitive(g, sa, params, mp)
        act = tr.active_mask(slice(None))
        ok &= bool(np.all(act[1:] >= act[:-1]))
    results["NC monotone spread"] = ok

    ok = True
    for seed in range(instances):
        g, params, sa, sb, _ = random_instance(1000 + seed)
        tr = run_semiprogressive(g, sa, sb, seed % 4, params, ModelParams(delta=[0.0, 0.1][seed % 2], horizon=30),
                                 rng=seed)
        ok &= not len(tr.events_of("deactivate"))
        for t in range(tr.horizon + 1):
            ok &= not (tr.active_mask(t, 0) & tr.active_mask(t, 1)).any()
    results["SP no deactivations, disjoint campaigns"] = bool(ok)

    ok = True
    for seed in range(instances):
        g, params, sa, sb, _ = random_instance(2000 + seed)
        mp = ModelParams(delta=[0.0, 0.1][seed % 2], lam=[0.0, 5.0][(seed // 2) % 2], horizon=30)
        tr = run_nonprogressive(g, sa, sb, 0, params, mp, rng=seed)
        per_step = {}
        for t, v, k, _ in tr.event_tuples():
            per_step.setdefault((t, v), set()).add(k)
        ok &= not any({"switch", "deactivate"} <= ks for ks in per_step.values())
        try:
            replay_check(tr, g, params, mp)
        except AssertionError:
            ok = False
    results["NP R2/R6 mutual exclusivity"] = bool(ok)

    rng = np.random.default_rng(4)
    ok = True
    for _ in range(instances * 100):
        theta = float(1.0 - rng.random())
        delta = float(rng.uniform(0.0, 0.5))
        t_last = int(rng.integers(0, 50))
        t = t_last + int(rng.integers(0, 50))
        gv = activation_threshold(theta, delta, t, t_last)
        ok &= theta <= gv <= 1.0
        if delta > 0:
            ok &= activation_threshold(theta, delta, t_last + math.ceil((1 - theta) / delta), t_last) == 1.0
    results["g in [theta, 1] and saturation"] = bool(ok)

    ok = True
    for _ in range(instances * 100):
        tau = float(rng.uniform(0, 5))
        ok &= quiescence_duration(tau, float(rng.uniform(0, 5)), float(rng.random())) >= tau
    results["q >= tau"] = bool(ok)

    ok = True
    with_quiescent = 0
    for seed in range(instances):
        g, params, sa, _, _ = random_instance(3000 + seed)
        tr = run_noncompetitive(g, sa, params, ModelParams(lam=5.0, horizon=int(3 + seed % 5)))
        final = spread_series(tr)[0].final
        quiescent = tr.quiescent(-1)
        with_quiescent += bool(quiescent)
        ok &= final == int((tr.states[-1] == State.ACTIVE_A).sum())
        ok &= not (quiescent & tr.active(-1))
    results["quiescent-at-horizon excluded"] = bool(ok) and with_quiescent > 0

    failed = [k for k, v in results.items() if not v]
    acceptance(4, "PASS" if not failed else "FAIL",
               f"{len(results)} suites x >= {instances} instances"
               + (f"; failed: {failed}" if failed else ""))
    assert not failed


# ---- 5. trend reproduction ---------------------------------------------------------------------


def _summary(net, runs, **kw):
    values = {"dataset": "in-memory", "format": "snap-signed", "mode": "full", "k": "50",
              "runs": str(runs), "master_seed": "2024"}
    values.update({k: str(v) for k, v in kw.items()})
    cfg = build_config(values)
    ctx = prepare_context(cfg, net)
    return build_summary(cfg, execute_runs(ctx, WORKERS))


def trend_checks(net, runs, strategies):
    """Mean-level trend inequalities; returns {label: (ok, detail)}."""
    out = {}

    worst = []
    loss_first, loss_last, finals = [], [], []
    for s in strategies:
        summ = _summary(net, runs, model="nc", strategy=s)
        st = np.array(summ["series_mean"]["stressed_A"])
        un = np.array(summ["series_mean"]["unstressed_A"])
        if not np.all(st <= un * (1 + SLACK)):
            worst.append(s)
        summ = _summary(net, runs, model="nc", strategy=s, lam=5.0)
        loss = np.array(summ["series_mean"]["activation_loss_A"])
        q = max(1, len(loss) // 4)
        loss_first.append(loss[:q].mean())
        loss_last.append(loss[-q:].mean())
        finals.append(loss[-1])
    out["a stressed <= unstressed"] = (not worst, f"violated for {worst}" if worst else "all strategies")

    first_ok = all(f >= l * (1 - SLACK) for f, l in zip(loss_first, loss_last))
    near_zero = sum(f <= 100 * SLACK for f in finals)
    out["c activation loss decays"] = (
        first_ok and near_zero * 2 > len(finals),
        f"first/last quartile means {np.round(loss_first, 2).tolist()} / {np.round(loss_last, 2).tolist()}, "
        f"finals {np.round(finals, 2).tolist()}",
    )

    totals = []
    for delta in (0.0, 0.1):
        summ = _summary(net, runs, model="sp", strategy="st", strategy_b="is", delta=delta)
        totals.append(sum(summ["switch_stats"][c]["total"] for c in "AB"))
    out["b switches fall with delta"] = (totals[1] <= totals[0] * (1 + SLACK),
                                         f"mean total switches delta=0: {totals[0]:.2f}, delta=0.1: {totals[1]:.2f}")

    deact = []
    for frac in (0.0, 0.25, 0.5, 0.75):
        summ = _summary(net, runs, model="np", strategy="st", strategy_b="is", delta=0.1, delay_fraction=frac)
        d = summ["deactivation_stats"]
        deact.append((frac, d["A"]["total"], d["B"]["total"]))
    grows = [a >= b * (1 - SLACK) for f, a, b in deact if f > 0]
    out["d bad deactivations exceed good"] = (
        all(grows) and deact[-1][1] > deact[-1][2] * (1 - SLACK),
        "; ".join(f"dt0={f}: A {a:.1f} vs B {b:.1f}" for f, a, b in deact),
    )
    return out


@pytest.mark.slow
def test_5_trends_wiki_vote(acceptance):
    path = find_dataset("wiki-vote")
    if path is None:
        reason = missing_reason(["wiki-vote"])
        acceptance(5, "SKIP", reason)
        pytest.skip(reason)
    start = time.perf_counter()
    net = restrict_for_diffusion(parse_edge_list(path, DATASETS["wiki-vote"][1]), "lcc")
    checks = trend_checks(net, 200, ["ms", "is", "st", "ln", "mn"])
    elapsed = time.perf_counter() - start
    failed = [k for k, (ok, _) in checks.items() if not ok]
    ok = not failed and elapsed < 600
    for label, (c_ok, detail) in sorted(checks.items()):
        acceptance(f"5{label[0]}", "PASS" if c_ok else "FAIL", f"{label[2:]}: {detail}")
    acceptance(5, "PASS" if ok else "FAIL", f"{elapsed:.0f}s" + (f"; failed: {failed}" if failed else ""))
    assert ok


@pytest.mark.slow
def test_5_supplementary_stand_in(acceptance):
    # synthetic graph of the same size; random signs and timestamps, so trends are reported, not asserted
    net = restrict_for_diffusion(wiki_vote_like(0, sources=300), "lcc")
    start = time.perf_counter()
    checks = trend_checks(net, 200, ["ms", "is", "st", "ln", "mn"])
    for label, (ok, detail) in sorted(checks.items()):
        acceptance(f"5{label[0]}", f"SUPPLEMENTARY {'holds' if ok else 'does not hold'} on synthetic stand-in",
                   f"{label[2:]}: {detail}")
    acceptance(5, "SUPPLEMENTARY", f"stand-in trend sweep took {time.perf_counter() - start:.0f}s")


# ---- 6. determinism --------------------------------------------------------------------------------


def test_6_determinism(tmp_path, acceptance):
    data = tmp_path / "out.standin"
    with open(data, "w") as fh:
        write_konect(wiki_vote_like(1, sources=200), fh)
    base = {"dataset": str(data), "model": "np", "strategy": "st", "strategy_b": "is", "k": "50",
            "delta": "0.1", "lambda": "5", "prob_a": "0.5", "delay_fraction": "0.25", "runs": "40",
            "master_seed": "11"}
    start = time.perf_counter()
    blobs = []
    for workers in (1, 8):
        out = tmp_path / f"w{workers}"
        run_experiment(build_config(dict(base, output=str(out))), workers=workers)
        blobs.append({n: (out / n).read_bytes() for n in ("runs.csv", "summary.json")})
    elapsed = time.perf_counter() - start
    same = blobs[0] == blobs[1]
    ok = same and elapsed < 60
    acceptance(6, "PASS" if ok else "FAIL",
               f"runs.csv/summary.json {'byte-identical' if same else 'DIFFER'} for 1 vs 8 workers, {elapsed:.1f}s")
    assert ok


# ---- 7. performance ------------------------------------------------------------------------------------


def _time_runs(net, runs, **kw):
    values = {"dataset": "in-memory", "format": "snap-signed", "mode": "full", "k": "50",
              "runs": str(runs), "master_seed": "0"}
    values.update({k: str(v) for k, v in kw.items()})
    cfg = build_config(values)
    start = time.perf_counter()
    execute_runs(prepare_context(cfg, net), WORKERS)
    return time.perf_counter() - start


@pytest.mark.slow
def test_7_performance_real(acceptance):
    missing = [n for n in ("wiki-vote", "slashdot") if find_dataset(n) is None]
    if missing:
        reason = missing_reason(missing)
        acceptance(7, "SKIP", reason)
        pytest.skip(reason)
    wv = restrict_for_diffusion(parse_edge_list(find_dataset("wiki-vote"), "konect-timestamped"), "lcc")
    sd = restrict_for_diffusion(parse_edge_list(find_dataset("slashdot"), "snap-signed"), "lcc")
    t_nc = _time_runs(wv, 1000, model="nc", strategy="st")
    t_sp = _time_runs(sd, 100, model="sp", strategy="st", strategy_b="is")
    ok = t_nc < 60 and t_sp < 600
    acceptance(7, "PASS" if ok else "FAIL",
               f"1000 NC runs on Wiki-Vote: {t_nc:.1f}s; 100 SP runs on Slashdot: {t_sp:.1f}s ({WORKERS} workers)")
    assert ok


@pytest.mark.slow
def test_7_supplementary_stand_in(acceptance):
    # same node/edge counts as the Wiki-Vote LCC and the Slashdot LCC
    wv = wiki_vote_like(0)
    t_nc = _time_runs(wv, 1000, model="nc", strategy="st")
    # the Slashdot-sized core gets a zero-in-degree frontier so I-Sources has candidates
    sd = signed_network(23_217 + 2_000, 243_600, 0.233, np.random.default_rng(5), sources=2_000, skew=0.9)
    t_sp = _time_runs(sd, 100, model="sp", strategy="st", strategy_b="is")
    ok = t_nc < 60 and t_sp < 600
    acceptance(7, f"SUPPLEMENTARY {'PASS' if ok else 'FAIL'}",
               f"stand-ins: 1000 NC runs ({wv.node_count} nodes/{wv.edge_count} edges) {t_nc:.1f}s; "
               f"100 SP runs ({sd.node_count}/{sd.edge_count}) {t_sp:.1f}s; {WORKERS} worker(s)")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
