#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.analysis.bounds` --- Convergence bounds of the flows
=======================================================================

Upper bounds on the divergence of the chi-squared flow (CSF) and of the
LAWGD density flow from the target, as functions of time.  ``cp`` is the
Poincaré constant and ``clsi`` the log-Sobolev constant of the target.

=========================  ===========================================  ============
bound                      value                                        valid for
=========================  ===========================================  ============
``csf_kl``                 ``KL0 exp(-2t/cp)``, and                     all t
                           ``min(KL0, 2) exp(-2t/cp)``                  ``t >= cp/2``
``csf_chi2_poincare``      ``min(chi0, (9 cp / (8 t))²)``               ``t > 0``
``csf_chi2_logconcave``    ``chi0 exp(-t / (2 cp))``                    all t
``csf_chi2_lsi``           ``min(chi0, 2) exp(-t / (9 clsi))``          ``t >= 7 clsi``
``lawgd_kl``               ``KL0 exp(-t)``, and                         all t
                           ``min(KL0, 2) exp(-t)``                      ``t >= 1``
=========================  ===========================================  ============
"""
from __future__ import annotations

import logging
from typing import Dict, Optional

import numpy as np
import pandas as pd

from SteinFlow.core.sftypes import FloatArray

__all__ = [
    "csf_kl_bound",
    "csf_chi2_poincare_bound",
    "csf_chi2_logconcave_bound",
    "csf_chi2_lsi_bound",
    "lawgd_kl_bound",
    "check_bounds",
]

logger = logging.getLogger(__name__)


def csf_kl_bound(t, kl0: float, cp: float) -> FloatArray:
    t = np.asarray(t, dtype=np.float64)
    prefactor = np.where(t >= 0.5 * cp, min(kl0, 2.0), kl0)
    return prefactor * np.exp(-2.0 * t / cp)


def csf_chi2_poincare_bound(t, chi0: float, cp: float) -> FloatArray:
    t = np.asarray(t, dtype=np.float64)
    with np.errstate(divide="ignore"):
        polynomial = np.where(t > 0, (9.0 * cp / (8.0 * t)) ** 2, np.inf)
    return np.minimum(chi0, polynomial)


def csf_chi2_logconcave_bound(t, chi0: float, cp: float) -> FloatArray:
    """Bound for strongly log-concave targets."""
    t = np.asarray(t, dtype=np.float64)
    return chi0 * np.exp(-t / (2.0 * cp))


def csf_chi2_lsi_bound(t, chi0: float, clsi: float) -> FloatArray:
    """Uniform bound, NaN before ``7 clsi``."""
    t = np.asarray(t, dtype=np.float64)
    return np.where(
        t >= 7.0 * clsi, min(chi0, 2.0) * np.exp(-t / (9.0 * clsi)), np.nan
    )


def lawgd_kl_bound(t, kl0: float) -> FloatArray:
    t = np.asarray(t, dtype=np.float64)
    prefactor = np.where(t >= 1.0, min(kl0, 2.0), kl0)
    return prefactor * np.exp(-t)


def check_bounds(
    divergences: pd.DataFrame,
    kind: str,
    poincare_constant: Optional[float] = None,
    lsi_constant: Optional[float] = None,
    log_concave: bool = False,
    rtol: float = 0.0,
) -> pd.DataFrame:
    """Compare a divergence series with the applicable bounds.
    :param divergences: DataFrame with columns ``t``, ``kl``, ``chi2``
    :param kind: ``"csf"`` or ``"lawgd"``
    :param poincare_constant: Poincaré constant of the target
    :param lsi_constant: log-Sobolev constant of the target
    :param log_concave: whether the target is strongly log-concave
    :param rtol: relative slack granted to the bounds
    :return: long-format table with columns ``t``, ``bound``, ``quantity``,
        ``value``, ``limit`` and ``satisfied`` (rows where a bound does not
        apply are dropped)"""
    t = divergences["t"].to_numpy()
    kl = divergences["kl"].to_numpy()
    chi2 = divergences["chi2"].to_numpy()
    kl0, chi0 = float(kl[0]), float(chi2[0])
    bounds: Dict[str, tuple] = {}
    if kind == "lawgd":
        bounds["lawgd_kl"] = ("kl", lawgd_kl_bound(t, kl0))
    elif kind == "csf":
        if poincare_constant is not None:
            bounds["csf_kl"] = ("kl", csf_kl_bound(t, kl0, poincare_constant))
            bounds["csf_chi2_poincare"] = (
                "chi2",
                csf_chi2_poincare_bound(t, chi0, poincare_constant),
            )
            if log_concave:
                bounds["csf_chi2_logconcave"] = (
                    "chi2",
                    csf_chi2_logconcave_bound(t, chi0, poincare_constant),
                )
        if lsi_constant is not None:
            bounds["csf_chi2_lsi"] = (
                "chi2",
                csf_chi2_lsi_bound(t, chi0, lsi_constant),
            )
    else:
        raise ValueError(f"Unknown flow kind {kind!r}")
    if not bounds:
        logger.finfo("No functional inequality constants known, no bounds checked")
    frames = []
    for name, (quantity, limit) in bounds.items():
        values = kl if quantity == "kl" else chi2
        frame = pd.DataFrame(
            {
                "t": t,
                "bound": name,
                "quantity": quantity,
                "value": values,
                "limit": limit,
            }
        )
        frame = frame[np.isfinite(frame["limit"])]
        frame["satisfied"] = frame["value"] <= frame["limit"] * (1.0 + rtol)
        frames.append(frame)
    if not frames:
        return pd.DataFrame(
            columns=["t", "bound", "quantity", "value", "limit", "satisfied"]
        )
    return pd.concat(frames, ignore_index=True)
