# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled event kernel for the exchange + flip chain.

Mirrors the pure-Python kernel expression for expression so that both
backends consume the pre-drawn uniforms identically and produce
byte-identical trajectories.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def run_events(cnp.uint8_t[::1] occ, Py_ssize_t nevents,
               double[::1] u_select, double[::1] u_accept,
               Py_ssize_t d, Py_ssize_t n_sites, double w_exch, double w_flip,
               cnp.int64_t[::1] exch_k, double[:, ::1] exch_tables,
               cnp.int32_t[:, :, ::1] exch_maps, cnp.int32_t[:, ::1] nbr_fwd,
               Py_ssize_t flip_k_p, Py_ssize_t flip_k_m,
               double[::1] flip_table_p, double[::1] flip_table_m,
               cnp.int32_t[:, ::1] flip_map_p, cnp.int32_t[:, ::1] flip_map_m,
               double c_max, double g_max):
    """Apply nevents proposals in place; return (accepted_exch, accepted_flip)."""
    cdef double total = w_exch + w_flip
    cdef long acc_ex = 0, acc_fl = 0
    cdef Py_ssize_t n_bonds = d * n_sites
    cdef Py_ssize_t e, j, i, x, y, jj, idx, k
    cdef double v
    cdef cnp.uint8_t tmp
    for e in range(nevents):
        v = u_select[e] * total
        if v < w_exch:
            j = <Py_ssize_t>(v / w_exch * n_bonds)
            if j >= n_bonds:
                j = n_bonds - 1
            i = j // n_sites
            x = j - i * n_sites
            y = nbr_fwd[i, x]
            if occ[x] != occ[y]:
                idx = 0
                for jj in range(exch_k[i]):
                    idx |= occ[exch_maps[i, jj, x]] << jj
                if u_accept[e] * c_max < exch_tables[i, idx]:
                    tmp = occ[x]
                    occ[x] = occ[y]
                    occ[y] = tmp
                    acc_ex += 1
        else:
            x = <Py_ssize_t>((v - w_exch) / w_flip * n_sites)
            if x >= n_sites:
                x = n_sites - 1
            if occ[x]:
                idx = 0
                for jj in range(flip_k_m):
                    idx |= occ[flip_map_m[jj, x]] << jj
                if u_accept[e] * g_max < flip_table_m[idx]:
                    occ[x] ^= 1
                    acc_fl += 1
            else:
                idx = 0
                for jj in range(flip_k_p):
                    idx |= occ[flip_map_p[jj, x]] << jj
                if u_accept[e] * g_max < flip_table_p[idx]:
                    occ[x] ^= 1
                    acc_fl += 1
    return acc_ex, acc_fl
