"""Pure-Python event kernel for the exchange + flip chain.

Consumes the same pre-drawn uniform arrays, in the same order and with the
same floating-point expressions, as the compiled kernel, so trajectories
are byte-identical across backends.
"""

from __future__ import annotations


def run_events(occ, nevents, u_select, u_accept,
               d, n_sites, w_exch, w_flip,
               exch_k, exch_tables, exch_maps, nbr_fwd,
               flip_k_p, flip_k_m, flip_table_p, flip_table_m,
               flip_map_p, flip_map_m, c_max, g_max):
    """Apply nevents proposals in place; return (accepted_exch, accepted_flip)."""
    total = w_exch + w_flip
    acc_ex = 0
    acc_fl = 0
    n_bonds = d * n_sites
    for e in range(nevents):
        v = u_select[e] * total
        if v < w_exch:
            j = int(v / w_exch * n_bonds)
            if j >= n_bonds:
                j = n_bonds - 1
            i = j // n_sites
            x = j - i * n_sites
            y = nbr_fwd[i, x]
            if occ[x] != occ[y]:
                idx = 0
                for jj in range(exch_k[i]):
                    idx |= int(occ[exch_maps[i, jj, x]]) << jj
                if u_accept[e] * c_max < exch_tables[i, idx]:
                    occ[x], occ[y] = occ[y], occ[x]
                    acc_ex += 1
        else:
            x = int((v - w_exch) / w_flip * n_sites)
            if x >= n_sites:
                x = n_sites - 1
            if occ[x]:
                k, table, maps = flip_k_m, flip_table_m, flip_map_m
            else:
                k, table, maps = flip_k_p, flip_table_p, flip_map_p
            idx = 0
            for jj in range(k):
                idx |= int(occ[maps[jj, x]]) << jj
            if u_accept[e] * g_max < table[idx]:
                occ[x] ^= 1
                acc_fl += 1
    return acc_ex, acc_fl
