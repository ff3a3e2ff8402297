"""Compiled inner loops for the table-driven machine engine.

Tables are flat: ``key = (state * S + sym_0) * S + sym_1 ...``; ``nxt[key] < 0`` means no rule
(halting states have no rules). Return codes: 0 halted, 1 budget, 2 undefined, 3 grow, 4 fell off.
"""
import numba
import numpy as np


@numba.njit(cache=True)
def run_core(tape, head, state, steps, lim, nxt, wr, mv, halting, S):
    T = tape.shape[0]
    L = tape.shape[1]
    if T == 1:
        t0 = tape[0]
        w0 = wr[0]
        while True:
            if steps >= lim:
                return (0 if halting[state] else 1), head, state, steps
            key = state * S + t0[head]
            ns = nxt[key]
            if ns < 0:
                return (0 if halting[state] else 2), head, state, steps
            t0[head] = w0[key]
            head += mv[key]
            state = ns
            steps += 1
            if head < 0:
                return 4, head, state, steps
            if head >= L:
                return 3, head, state, steps
    if T == 2:
        t0 = tape[0]
        t1 = tape[1]
        w0 = wr[0]
        w1 = wr[1]
        while True:
            if steps >= lim:
                return (0 if halting[state] else 1), head, state, steps
            key = (state * S + t0[head]) * S + t1[head]
            ns = nxt[key]
            if ns < 0:
                return (0 if halting[state] else 2), head, state, steps
            t0[head] = w0[key]
            t1[head] = w1[key]
            head += mv[key]
            state = ns
            steps += 1
            if head < 0:
                return 4, head, state, steps
            if head >= L:
                return 3, head, state, steps
    while True:
        if steps >= lim:
            return (0 if halting[state] else 1), head, state, steps
        key = state
        for t in range(T):
            key = key * S + tape[t, head]
        ns = nxt[key]
        if ns < 0:
            return (0 if halting[state] else 2), head, state, steps
        for t in range(T):
            tape[t, head] = wr[t, key]
        head += mv[key]
        state = ns
        steps += 1
        if head < 0:
            return 4, head, state, steps
        if head >= L:
            return 3, head, state, steps


@numba.njit(cache=True)
def grow(tape, blank):
    T, L = tape.shape
    out = np.full((T, 2 * L), blank, dtype=tape.dtype)
    out[:, :L] = tape
    return out


@numba.njit(cache=True)
def run_batch(lengths, one, blank, left, start, lim, nxt, wr, mv, halting, S):
    R, T = lengths.shape
    res = np.zeros((R, 4 + T), dtype=np.int64)
    for r in range(R):
        L = 2
        for t in range(T):
            if lengths[r, t] + 2 > L:
                L = lengths[r, t] + 2
        tape = np.full((T, 2 * L + 16), blank, dtype=np.int64)
        for t in range(T):
            tape[t, 0] = left
            for i in range(lengths[r, t]):
                tape[t, 1 + i] = one
        head, state, steps = 1, start, 0
        while True:
            code, head, state, steps = run_core(tape, head, state, steps, lim, nxt, wr, mv, halting, S)
            if code != 3:
                break
            tape = grow(tape, blank)
        res[r, 0] = code
        res[r, 1] = steps
        res[r, 2] = head
        res[r, 3] = state
        for t in range(T):
            c = 0
            for i in range(tape.shape[1]):
                if tape[t, i] == one:
                    c += 1
            res[r, 4 + t] = c
    return res
