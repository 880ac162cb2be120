"""Pure-Python/numpy diffusion kernel.

Mirrors ``_ckernel.pyx`` operation for operation: influence sums are
accumulated per node in in-edge order and scalar quiescence math uses libm
through :mod:`math`, so both kernels emit bit-identical traces.
"""
from __future__ import annotations

import math

import numpy as np

from .rng import tie_uniform

NC, SP, NP = 0, 1, 2
QUIESCE, ACTIVATE, SWITCH, DEACTIVATE = 0, 1, 2, 3


def simulate(in_indptr, src, weight, theta, tau, delta, lam, horizon, model,
             seeds_a, seeds_b, delay_b, prob_a, tie_seed):
    n = len(theta)
    dst = np.repeat(np.arange(n, dtype=np.int64), np.diff(in_indptr))
    posw = np.where(weight > 0, weight, 0.0)
    negw = np.where(weight < 0, -weight, 0.0)

    state = np.zeros(n, dtype=np.int8)
    qexp = np.zeros(n, dtype=np.int64)
    tlast = np.full(n, -1, dtype=np.int64)
    seeded_b = np.zeros(n, dtype=bool)
    seeded_b[seeds_b] = True

    ev_step, ev_node, ev_kind, ev_camp = [], [], [], []

    def emit(t, nodes, kinds, camps):
        order = np.lexsort((kinds, nodes))
        ev_step.append(np.full(len(nodes), t, dtype=np.int32))
        ev_node.append(np.asarray(nodes, dtype=np.int32)[order])
        ev_kind.append(np.asarray(kinds, dtype=np.int8)[order])
        ev_camp.append(np.asarray(camps, dtype=np.int8)[order])

    seeds_a = np.asarray(seeds_a, dtype=np.int64)
    state[seeds_a] = 1
    tlast[seeds_a] = 0
    init = [seeds_a]
    if delay_b == 0:
        sb = np.asarray(seeds_b, dtype=np.int64)
        state[sb] = 2
        tlast[sb] = 0
        init.append(sb)
    init_nodes = np.concatenate(init)
    emit(0, init_nodes, np.full(len(init_nodes), ACTIVATE), state[init_nodes] - 1)

    snapshots = [state.copy()]
    skipped = 0
    unbounded = horizon < 0
    t = 0
    while unbounded or t < horizon:
        t += 1
        prev = snapshots[-1]
        act_a = prev == 1
        act_b = prev == 2
        inf_a = np.bincount(dst, weights=posw * act_a[src], minlength=n)
        inf_b = (np.bincount(dst, weights=posw * act_b[src], minlength=n)
                 if model != NC else np.zeros(n))
        nodes, kinds, camps = [], [], []

        expire = (prev >= 3) & (qexp <= t)
        for v in np.flatnonzero(expire):
            c = int(prev[v]) - 3
            state[v] = c + 1
            tlast[v] = t
            nodes.append(v); kinds.append(ACTIVATE); camps.append(c)

        seeding_now = np.zeros(n, dtype=bool)
        if delay_b > 0 and t == delay_b:
            for v in np.flatnonzero(seeded_b):
                if prev[v] == 0:
                    state[v] = 2
                    tlast[v] = t
                    seeding_now[v] = True
                    nodes.append(v); kinds.append(ACTIVATE); camps.append(1)
                else:
                    skipped += 1

        inactive = (prev == 0) & ~seeding_now
        hit_a = inactive & (inf_a >= theta)
        hit_b = inactive & (inf_b >= theta) if model != NC else np.zeros(n, dtype=bool)
        entering = np.flatnonzero(hit_a | hit_b)
        if len(entering):
            neg = None
            if lam != 0:
                act = act_a | act_b
                neg = np.bincount(dst, weights=negw * act[src], minlength=n)
            for v in entering:
                if hit_a[v] and hit_b[v]:
                    c = 0 if tie_uniform(tie_seed, int(v), t) < prob_a else 1
                else:
                    c = 0 if hit_a[v] else 1
                q = tau[v] + math.exp(lam * neg[v]) if lam != 0 else tau[v]
                d = math.ceil(q)
                nodes.append(v); kinds.append(QUIESCE); camps.append(c)
                if d == 0:
                    state[v] = c + 1
                    tlast[v] = t
                    nodes.append(v); kinds.append(ACTIVATE); camps.append(c)
                else:
                    state[v] = c + 3
                    qexp[v] = t + d

        if model != NC:
            active = np.flatnonzero(act_a | act_b)
            if len(active):
                th = theta[active]
                cur = prev[active] - 1
                inf_c = np.where(cur == 0, inf_a[active], inf_b[active])
                inf_r = np.where(cur == 0, inf_b[active], inf_a[active])
                g = th.copy()
                if delta != 0:
                    cap = (1.0 - th) / delta
                    held = (t - tlast[active]).astype(np.float64)
                    g = np.where(held >= cap, 1.0, np.minimum(th + delta * held, 1.0))
                switch = (inf_r >= g) & (inf_r > inf_c)
                for v, c in zip(active[switch], cur[switch]):
                    state[v] = 2 - c
                    tlast[v] = t
                    nodes.append(v); kinds.append(SWITCH); camps.append(1 - c)
                if model == NP:
                    deact = ~switch & (inf_a[active] < th) & (inf_b[active] < th)
                    for v, c in zip(active[deact], cur[deact]):
                        state[v] = 0
                        tlast[v] = -1
                        nodes.append(v); kinds.append(DEACTIVATE); camps.append(c)

        emit(t, np.asarray(nodes, dtype=np.int64), np.asarray(kinds, dtype=np.int64),
             np.asarray(camps, dtype=np.int64))
        snapshots.append(state.copy())
        if not nodes and not np.any(state >= 3) and t >= delay_b:
            break

    steps_run = t
    if not unbounded:
        while len(snapshots) < horizon + 1:
            snapshots.append(snapshots[-1])
    return (
        np.stack(snapshots),
        np.concatenate(ev_step),
        np.concatenate(ev_node),
        np.concatenate(ev_kind),
        np.concatenate(ev_camp),
        skipped,
        steps_run,
    )
