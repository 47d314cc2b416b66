"""Loop kernels, compiled by numba when available.

Column layout of a count row: 0..20 -> SC1..SC21, 21..24 -> HC1..HC4.
Limit vector order follows ``model.DEFAULT_LIMITS``.
"""
import numpy as np

from .._accel import njit

# limit vector slots
L_MAX_FREE, L_MAX_TYPES, L_MAX_SAME, L_MAX_WORK, L_MAX_TYPES_WEEK, L_MAX_WEEKDAY = 0, 1, 2, 3, 4, 5
L_MIN_REST, L_MAX_BANK, L_MAX_SHIFTS, L_MIN_FREE, L_MAX_WEEKENDS, L_MIN_WORK, L_MAX_BLANK = (
    6, 7, 8, 9, 10, 11, 12)

N_COUNTS = 25


@njit
def count_one(grid, start, duration, night, skill_ok, alt_used, max_minutes,
              day_off_req, shift_on_req, shift_off_req, forbidden,
              block_start, block_len, bank, limits, out):
    n_nurses, n_days = grid.shape
    n_shifts = start.shape[0]
    off = n_shifts
    for k in range(N_COUNTS):
        out[k] = 0
    used = np.zeros(n_shifts, np.bool_)
    weekday = np.zeros(7, np.int64)
    n_blocks = block_start.shape[0]
    worked_block = np.zeros(n_blocks, np.bool_)

    for n in range(n_nurses):
        row = grid[n]
        minutes = 0
        shifts = 0
        bank_worked = 0
        for s in range(n_shifts):
            used[s] = False
        for w in range(7):
            weekday[w] = 0

        # cell-level terms
        for d in range(n_days):
            g = row[d]
            if day_off_req[n, d] and g != off:
                out[9] += 1
            for s in range(n_shifts):
                if shift_on_req[n, d, s] and g != s:
                    out[4] += 1
                if shift_off_req[n, d, s] and g == s:
                    out[6] += 1
            if g == off:
                continue
            shifts += 1
            minutes += duration[g]
            used[g] = True
            weekday[d % 7] += 1
            if bank[d]:
                bank_worked += 1
            if not skill_ok[n, g]:
                out[24] += 1
            elif alt_used[n, g]:
                out[12] += 1
                out[13] += 1
            if d + 1 < n_days:
                h = row[d + 1]
                if h != off:
                    if forbidden[g, h]:
                        out[10] += 1
                    rest = 1440 + start[h] - (start[g] + duration[g])
                    if rest < limits[L_MIN_REST]:
                        out[14] += 1
            if d + 2 < n_days and night[g]:
                a = row[d + 1]
                b = row[d + 2]
                if a != off and b != off and night[a] and night[b]:
                    out[21] += 1

        if minutes > max_minutes[n]:
            out[1] += (minutes - max_minutes[n] + 59) // 60
        distinct = 0
        for s in range(n_shifts):
            if used[s]:
                distinct += 1
        if distinct > limits[L_MAX_TYPES]:
            out[3] += distinct - limits[L_MAX_TYPES]
        for w in range(7):
            if weekday[w] > limits[L_MAX_WEEKDAY]:
                out[11] += weekday[w] - limits[L_MAX_WEEKDAY]
        if bank_worked > limits[L_MAX_BANK]:
            out[16] += bank_worked - limits[L_MAX_BANK]
        if shifts > limits[L_MAX_SHIFTS]:
            out[17] += shifts - limits[L_MAX_SHIFTS]

        # per-week distinct types
        for w0 in range(0, n_days, 7):
            for s in range(n_shifts):
                used[s] = False
            for d in range(w0, min(w0 + 7, n_days)):
                if row[d] != off:
                    used[row[d]] = True
            distinct = 0
            for s in range(n_shifts):
                if used[s]:
                    distinct += 1
            if distinct > limits[L_MAX_TYPES_WEEK]:
                out[8] += distinct - limits[L_MAX_TYPES_WEEK]

        # maximal runs: off, working, same shift
        d = 0
        while d < n_days:
            e = d
            is_off = row[d] == off
            while e + 1 < n_days and (row[e + 1] == off) == is_off:
                e += 1
            length = e - d + 1
            if is_off:
                if length > limits[L_MAX_FREE]:
                    out[0] += length - limits[L_MAX_FREE]
                if length < limits[L_MIN_FREE]:
                    out[18] += 1
            else:
                if length > limits[L_MAX_WORK]:
                    out[7] += length - limits[L_MAX_WORK]
                if length < limits[L_MIN_WORK]:
                    out[20] += 1
            d = e + 1
        d = 0
        while d < n_days:
            e = d
            while e + 1 < n_days and row[e + 1] == row[d]:
                e += 1
            if row[d] != off and e - d + 1 > limits[L_MAX_SAME]:
                out[5] += e - d + 1 - limits[L_MAX_SAME]
            d = e + 1

        # weekends
        for b in range(n_blocks):
            worked = 0
            for d in range(block_start[b], block_start[b] + block_len[b]):
                if row[d] != off:
                    worked += 1
            worked_block[b] = worked > 0
            if 0 < worked < block_len[b]:
                out[2] += 1
            if worked == 0 and block_start[b] > 0:
                g = row[block_start[b] - 1]
                if g != off and night[g]:
                    out[15] += 1
        w0 = 0
        while w0 < n_days:
            count = 0
            for b in range(n_blocks):
                if worked_block[b] and w0 <= block_start[b] < w0 + 28:
                    count += 1
            if count > limits[L_MAX_WEEKENDS]:
                out[19] += count - limits[L_MAX_WEEKENDS]
            w0 += 28

    for d in range(n_days):
        blanks = 0
        for n in range(n_nurses):
            if grid[n, d] == off:
                blanks += 1
        if blanks > limits[L_MAX_BLANK]:
            out[23] += 1


@njit
def count_batch(grids, start, duration, night, skill_ok, alt_used, max_minutes,
                day_off_req, shift_on_req, shift_off_req, forbidden,
                block_start, block_len, bank, limits, out):
    for i in range(grids.shape[0]):
        count_one(grids[i], start, duration, night, skill_ok, alt_used, max_minutes,
                  day_off_req, shift_on_req, shift_off_req, forbidden,
                  block_start, block_len, bank, limits, out[i])


@njit
def construct_colony(tau, option_ok, option_night, uniforms, alpha, eta_beta,
                     local_update, phi, tau0, out):
    """Sample one grid per ant, cell by cell (nurse-major, day-minor).

    ``option_ok[n, o]`` masks skill conflicts; a night option is also masked
    when the two previous days of the same nurse were nights. With
    ``local_update`` every chosen component is pulled toward ``tau0``.
    """
    n_ants = uniforms.shape[0]
    n_nurses, n_days, n_opt = tau.shape
    weights = np.empty(n_opt, np.float64)
    for a in range(n_ants):
        grid = out[a]
        for n in range(n_nurses):
            for d in range(n_days):
                two_nights = (d >= 2 and option_night[grid[n, d - 1]]
                              and option_night[grid[n, d - 2]])
                total = 0.0
                for o in range(n_opt):
                    if option_ok[n, o] and not (two_nights and option_night[o]):
                        total += tau[n, d, o] ** alpha * eta_beta
                    weights[o] = total
                if total <= 0.0:
                    total = 0.0
                    for o in range(n_opt):
                        if option_ok[n, o] and not (two_nights and option_night[o]):
                            total += 1.0
                        weights[o] = total
                target = uniforms[a, n, d] * total
                choice = -1
                last = 0
                for o in range(n_opt):
                    feasible = option_ok[n, o] and not (two_nights and option_night[o])
                    if feasible:
                        last = o
                        if weights[o] > target:
                            choice = o
                            break
                if choice < 0:
                    choice = last
                grid[n, d] = choice
                if local_update:
                    tau[n, d, choice] = (1.0 - phi) * tau[n, d, choice] + phi * tau0


@njit
def decode_positions(positions, option_ok, option_night, upper, out):
    """Floor-decode real grids to option codes, repairing skill and night-run conflicts to Off."""
    n_part, n_nurses, n_days = positions.shape
    off = option_ok.shape[1] - 1
    for p in range(n_part):
        for n in range(n_nurses):
            for d in range(n_days):
                x = positions[p, n, d]
                if x < 0.0:
                    x = 0.0
                elif x > upper:
                    x = upper
                o = int(np.floor(x))
                if not option_ok[n, o]:
                    o = off
                elif (option_night[o] and d >= 2 and option_night[out[p, n, d - 1]]
                      and option_night[out[p, n, d - 2]]):
                    o = off
                out[p, n, d] = o
