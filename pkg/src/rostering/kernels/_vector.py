"""Vectorised numpy counterparts of the loop kernels (no JIT required).

Every function here must agree exactly with its twin in ``_loops``.
"""
import numpy as np

from ._loops import (L_MAX_BANK, L_MAX_BLANK, L_MAX_FREE, L_MAX_SAME, L_MAX_SHIFTS,
                     L_MAX_TYPES, L_MAX_TYPES_WEEK, L_MAX_WEEKDAY, L_MAX_WEEKENDS,
                     L_MAX_WORK, L_MIN_FREE, L_MIN_REST, L_MIN_WORK, N_COUNTS)


def _runs(mask):
    """Row index and length of every maximal True run in a 2-D bool array."""
    rows, cols = mask.shape
    padded = np.zeros((rows, cols + 2), np.int8)
    padded[:, 1:-1] = mask
    step = np.diff(padded, axis=1)
    r, s = np.nonzero(step == 1)
    _, e = np.nonzero(step == -1)
    return r, e - s


def _per_row(rows, values, n_rows):
    return np.bincount(rows, weights=values, minlength=n_rows).astype(np.int64)


def count_batch(grids, start, duration, night, skill_ok, alt_used, max_minutes,
                day_off_req, shift_on_req, shift_off_req, forbidden,
                block_start, block_len, bank, limits, out):
    n_batch, n_nurses, n_days = grids.shape
    n_shifts = start.shape[0]
    off = n_shifts
    lim = limits
    g = grids.astype(np.int64)
    work = g != off
    rows = g.reshape(-1, n_days)
    wrows = work.reshape(-1, n_days)
    n_rows = rows.shape[0]
    nurse_of_row = np.tile(np.arange(n_nurses), n_batch)
    # per-option lookups with an extra slot for Off
    dur = np.append(duration, 0)
    st = np.append(start, 0)
    nig = np.append(night, False).astype(bool)
    ok = np.concatenate([skill_ok, np.ones((n_nurses, 1), bool)], axis=1).astype(bool)
    alt = np.concatenate([alt_used, np.zeros((n_nurses, 1), bool)], axis=1).astype(bool)
    per_row = np.zeros((n_rows, N_COUNTS), np.int64)

    # runs of Off and of working days
    r, length = _runs(~wrows)
    per_row[:, 0] = _per_row(r, np.maximum(length - lim[L_MAX_FREE], 0), n_rows)
    per_row[:, 18] = _per_row(r, (length < lim[L_MIN_FREE]).astype(float), n_rows)
    r, length = _runs(wrows)
    per_row[:, 7] = _per_row(r, np.maximum(length - lim[L_MAX_WORK], 0), n_rows)
    per_row[:, 20] = _per_row(r, (length < lim[L_MIN_WORK]).astype(float), n_rows)

    # runs of one shift type
    padded = np.full((n_rows, n_days + 2), -1, np.int64)
    padded[:, 1:-1] = rows
    change = padded[:, 1:] != padded[:, :-1]
    cr, cc = np.nonzero(change)
    same_row = cr[1:] == cr[:-1]
    run_r = cr[:-1][same_row]
    run_start = cc[:-1][same_row]
    run_len = (cc[1:] - cc[:-1])[same_row]
    run_val = rows[run_r, run_start]
    excess = np.where(run_val != off, np.maximum(run_len - lim[L_MAX_SAME], 0), 0)
    per_row[:, 5] = _per_row(run_r, excess, n_rows)

    # hours and totals
    minutes = dur[rows].sum(axis=1)
    over = minutes - max_minutes[nurse_of_row]
    per_row[:, 1] = np.where(over > 0, (over + 59) // 60, 0)
    shifts = wrows.sum(axis=1)
    per_row[:, 17] = np.maximum(shifts - lim[L_MAX_SHIFTS], 0)
    per_row[:, 16] = np.maximum((wrows & bank[None, :].astype(bool)).sum(axis=1)
                                - lim[L_MAX_BANK], 0)

    onehot = rows[:, :, None] == np.arange(n_shifts)[None, None, :]
    distinct = onehot.any(axis=1).sum(axis=1)
    per_row[:, 3] = np.maximum(distinct - lim[L_MAX_TYPES], 0)
    n_weeks = -(-n_days // 7)
    pad = n_weeks * 7 - n_days
    oh = np.concatenate([onehot, np.zeros((n_rows, pad, n_shifts), bool)], axis=1)
    weekly = oh.reshape(n_rows, n_weeks, 7, n_shifts).any(axis=2).sum(axis=2)
    per_row[:, 8] = np.maximum(weekly - lim[L_MAX_TYPES_WEEK], 0).sum(axis=1)
    wk = np.concatenate([wrows, np.zeros((n_rows, pad), bool)], axis=1)
    by_weekday = wk.reshape(n_rows, n_weeks, 7).sum(axis=1)
    per_row[:, 11] = np.maximum(by_weekday - lim[L_MAX_WEEKDAY], 0).sum(axis=1)

    # requests
    dreq = np.tile(day_off_req.astype(bool), (n_batch, 1))
    per_row[:, 9] = (dreq & wrows).sum(axis=1)
    on_req = np.tile(shift_on_req.astype(bool), (n_batch, 1, 1))
    off_req = np.tile(shift_off_req.astype(bool), (n_batch, 1, 1))
    per_row[:, 4] = (on_req & ~onehot).sum(axis=(1, 2))
    per_row[:, 6] = (off_req & onehot).sum(axis=(1, 2))

    # skills
    nurse_cells = np.repeat(nurse_of_row[:, None], n_days, axis=1)
    cell_ok = ok[nurse_cells, rows]
    cell_alt = alt[nurse_cells, rows] & cell_ok
    per_row[:, 24] = (~cell_ok).sum(axis=1)
    per_row[:, 12] = cell_alt.sum(axis=1)
    per_row[:, 13] = per_row[:, 12]

    # consecutive-day pairs
    a, b = rows[:, :-1], rows[:, 1:]
    both = wrows[:, :-1] & wrows[:, 1:]
    forb = np.zeros((n_shifts + 1, n_shifts + 1), bool)
    forb[:n_shifts, :n_shifts] = forbidden.astype(bool)
    per_row[:, 10] = (both & forb[a, b]).sum(axis=1)
    rest = 1440 + st[b] - (st[a] + dur[a])
    per_row[:, 14] = (both & (rest < lim[L_MIN_REST])).sum(axis=1)
    nc = nig[rows]
    per_row[:, 21] = (nc[:, :-2] & nc[:, 1:-1] & nc[:, 2:]).sum(axis=1)

    # weekends
    n_blocks = block_start.shape[0]
    if n_blocks:
        member = np.zeros((n_days, n_blocks), np.int64)
        for k in range(n_blocks):
            member[block_start[k]:block_start[k] + block_len[k], k] = 1
        worked = wrows.astype(np.int64) @ member
        per_row[:, 2] = ((worked > 0) & (worked < block_len[None, :])).sum(axis=1)
        has_prev = block_start > 0
        prev_night = np.zeros((n_rows, n_blocks), bool)
        prev_night[:, has_prev] = nc[:, block_start[has_prev] - 1]
        per_row[:, 15] = ((worked == 0) & prev_night).sum(axis=1)
        window = block_start // 28
        n_windows = -(-n_days // 28)
        win = np.zeros((n_blocks, n_windows), np.int64)
        win[np.arange(n_blocks), window] = 1
        per_window = (worked > 0).astype(np.int64) @ win
        per_row[:, 19] = np.maximum(per_window - lim[L_MAX_WEEKENDS], 0).sum(axis=1)

    out[:] = per_row.reshape(n_batch, n_nurses, N_COUNTS).sum(axis=1)
    blanks = (~work).sum(axis=1)
    out[:, 23] = (blanks > lim[L_MAX_BLANK]).sum(axis=1)
    out[:, 22] = 0


def construct_colony(tau, option_ok, option_night, uniforms, alpha, eta_beta,
                     local_update, phi, tau0, out):
    n_ants = uniforms.shape[0]
    n_nurses, n_days, n_opt = tau.shape
    nurses = np.arange(n_nurses)
    ok = option_ok.astype(bool)
    nights = option_night.astype(bool)
    for a in range(n_ants):
        grid = out[a]
        for d in range(n_days):
            mask = ok.copy()
            if d >= 2:
                two = nights[grid[:, d - 1]] & nights[grid[:, d - 2]]
                mask[two[:, None] & nights[None, :]] = False
            w = np.where(mask, tau[:, d, :] ** alpha * eta_beta, 0.0)
            cum = np.cumsum(w, axis=1)
            dead = cum[:, -1] <= 0.0
            if dead.any():
                cum[dead] = np.cumsum(mask[dead].astype(np.float64), axis=1)
            target = uniforms[a, :, d] * cum[:, -1]
            hit = mask & (cum > target[:, None])
            last = n_opt - 1 - np.argmax(mask[:, ::-1], axis=1)
            choice = np.where(hit.any(axis=1), np.argmax(hit, axis=1), last)
            grid[:, d] = choice
            if local_update:
                tau[nurses, d, choice] = (1.0 - phi) * tau[nurses, d, choice] + phi * tau0


def decode_positions(positions, option_ok, option_night, upper, out):
    n_part, n_nurses, n_days = positions.shape
    off = option_ok.shape[1] - 1
    ok = option_ok.astype(bool)
    nights = option_night.astype(bool)
    codes = np.floor(np.clip(positions, 0.0, upper)).astype(np.int64)
    nurse_idx = np.arange(n_nurses)[None, :, None]
    codes = np.where(ok[nurse_idx, codes], codes, off)
    for d in range(2, n_days):
        two = nights[codes[:, :, d - 1]] & nights[codes[:, :, d - 2]]
        codes[:, :, d] = np.where(two & nights[codes[:, :, d]], off, codes[:, :, d])
    out[:] = codes
