# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled diffusion kernel. Semantics identical to ``_pykernel.simulate``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, ceil
from libc.stdint cimport uint64_t, int64_t, int32_t, int8_t
from libcpp.vector cimport vector

cnp.import_array()

cdef enum:
    NC = 0
    SP = 1
    NP = 2
    QUIESCE = 0
    ACTIVATE = 1
    SWITCH = 2
    DEACTIVATE = 3

cdef inline uint64_t _mix64(uint64_t x) nogil:
    x = (x ^ (x >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    x = (x ^ (x >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return x ^ (x >> 31)

cdef inline double _tie_uniform(uint64_t seed, int64_t node, int64_t step) nogil:
    cdef uint64_t key = ((<uint64_t>step & 0xFFFFFFFFULL) << 32) | (<uint64_t>node & 0xFFFFFFFFULL)
    cdef uint64_t h = _mix64(seed ^ _mix64(key + <uint64_t>0x9E3779B97F4A7C15ULL))
    return <double>(h >> 11) * (1.0 / 9007199254740992.0)


def tie_uniform(uint64_t seed, int64_t node, int64_t step):
    return _tie_uniform(seed, node, step)


cdef struct Event:
    int32_t step
    int32_t node
    int8_t kind
    int8_t camp


cdef inline void _push(vector[Event]& ev, int32_t t, int32_t v, int8_t k, int8_t c) nogil:
    cdef Event e
    e.step = t
    e.node = v
    e.kind = k
    e.camp = c
    ev.push_back(e)


def simulate(const int64_t[::1] in_indptr, const int32_t[::1] src, const double[::1] weight,
             const double[::1] theta, const double[::1] tau, double delta, double lam,
             int64_t horizon, int model, seeds_a, seeds_b, int64_t delay_b,
             double prob_a, uint64_t tie_seed):
    cdef Py_ssize_t n = theta.shape[0]
    cdef int8_t[::1] state = np.zeros(n, dtype=np.int8)
    cdef int8_t[::1] prev = np.zeros(n, dtype=np.int8)
    cdef int64_t[::1] qexp = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] tlast = np.full(n, -1, dtype=np.int64)
    cdef int8_t[::1] is_seed_b = np.zeros(n, dtype=np.int8)
    cdef const int32_t[::1] sa = np.ascontiguousarray(seeds_a, dtype=np.int32)
    cdef const int32_t[::1] sb = np.ascontiguousarray(seeds_b, dtype=np.int32)
    cdef vector[Event] events
    cdef vector[int8_t] snaps
    cdef Py_ssize_t i, v, e, u
    cdef int64_t t = 0
    cdef int64_t skipped = 0
    cdef int64_t d
    cdef int8_t s, c, r, su
    cdef double ia, ib, neg, w, q, g, th, cap, held, ic, ir
    cdef bint a_hit, b_hit, fired, any_q, competitive = model != NC
    cdef bint unbounded = horizon < 0

    for i in range(sb.shape[0]):
        is_seed_b[sb[i]] = 1
    for i in range(sa.shape[0]):
        state[sa[i]] = 1
        tlast[sa[i]] = 0
    if delay_b == 0:
        for i in range(sb.shape[0]):
            state[sb[i]] = 2
            tlast[sb[i]] = 0
    for v in range(n):
        if state[v] != 0:
            _push(events, 0, <int32_t>v, ACTIVATE, state[v] - 1)
    for v in range(n):
        snaps.push_back(state[v])

    with nogil:
        while unbounded or t < horizon:
            t += 1
            prev[:] = state
            fired = False
            for v in range(n):
                s = prev[v]
                if s != 0 and delay_b > 0 and t == delay_b and is_seed_b[v]:
                    skipped += 1
                if s >= 3:
                    if qexp[v] <= t:
                        state[v] = s - 2
                        tlast[v] = t
                        _push(events, <int32_t>t, <int32_t>v, ACTIVATE, s - 3)
                        fired = True
                    continue
                if s == 0 and delay_b > 0 and t == delay_b and is_seed_b[v]:
                    state[v] = 2
                    tlast[v] = t
                    _push(events, <int32_t>t, <int32_t>v, ACTIVATE, 1)
                    fired = True
                    continue
                if s != 0 and not competitive:
                    continue
                ia = 0.0
                ib = 0.0
                for e in range(in_indptr[v], in_indptr[v + 1]):
                    w = weight[e]
                    if w > 0:
                        su = prev[src[e]]
                        if su == 1:
                            ia += w
                        elif su == 2:
                            ib += w
                th = theta[v]
                if s == 0:
                    a_hit = ia >= th
                    b_hit = competitive and ib >= th
                    if not (a_hit or b_hit):
                        continue
                    if a_hit and b_hit:
                        c = 0 if _tie_uniform(tie_seed, v, t) < prob_a else 1
                    else:
                        c = 0 if a_hit else 1
                    if lam != 0:
                        neg = 0.0
                        for e in range(in_indptr[v], in_indptr[v + 1]):
                            w = weight[e]
                            if w < 0:
                                su = prev[src[e]]
                                if su == 1 or su == 2:
                                    neg += -w
                        q = tau[v] + exp(lam * neg)
                    else:
                        q = tau[v]
                    d = <int64_t>ceil(q)
                    _push(events, <int32_t>t, <int32_t>v, QUIESCE, c)
                    fired = True
                    if d == 0:
                        state[v] = c + 1
                        tlast[v] = t
                        _push(events, <int32_t>t, <int32_t>v, ACTIVATE, c)
                    else:
                        state[v] = c + 3
                        qexp[v] = t + d
                    continue
                # active node, competitive models only
                c = s - 1
                if c == 0:
                    ic = ia
                    ir = ib
                else:
                    ic = ib
                    ir = ia
                g = th
                if delta != 0:
                    cap = (1.0 - th) / delta
                    held = <double>(t - tlast[v])
                    if held >= cap:
                        g = 1.0
                    else:
                        g = th + delta * held
                        if g > 1.0:
                            g = 1.0
                if ir >= g and ir > ic:
                    state[v] = 2 - c
                    tlast[v] = t
                    _push(events, <int32_t>t, <int32_t>v, SWITCH, 1 - c)
                    fired = True
                elif model == NP and ia < th and ib < th:
                    state[v] = 0
                    tlast[v] = -1
                    _push(events, <int32_t>t, <int32_t>v, DEACTIVATE, c)
                    fired = True
            any_q = False
            for v in range(n):
                snaps.push_back(state[v])
                if state[v] >= 3:
                    any_q = True
            if not fired and not any_q and t >= delay_b:
                break

    cdef int64_t steps_run = t
    cdef Py_ssize_t rows = <Py_ssize_t>(snaps.size() // n) if n else t + 1
    states = np.empty((rows, n), dtype=np.int8)
    cdef int8_t[:, ::1] sv = states
    cdef Py_ssize_t k = 0
    for i in range(rows):
        for v in range(n):
            sv[i, v] = snaps[k]
            k += 1
    if not unbounded and rows < horizon + 1:
        states = np.concatenate([states, np.repeat(states[-1:], horizon + 1 - rows, axis=0)])

    cdef Py_ssize_t m = events.size()
    ev_step = np.empty(m, dtype=np.int32)
    ev_node = np.empty(m, dtype=np.int32)
    ev_kind = np.empty(m, dtype=np.int8)
    ev_camp = np.empty(m, dtype=np.int8)
    cdef int32_t[::1] es = ev_step
    cdef int32_t[::1] en = ev_node
    cdef int8_t[::1] ek = ev_kind
    cdef int8_t[::1] ec = ev_camp
    for i in range(m):
        es[i] = events[i].step
        en[i] = events[i].node
        ek[i] = events[i].kind
        ec[i] = events[i].camp
    return states, ev_step, ev_node, ev_kind, ev_camp, skipped, steps_run
