"""The full commutation table of the generator set, as data.

Each entry states [left, right] = i * (weighted sum of generators); the
bracket operation must reproduce the weights exactly.  Shared by the test
suite and the verify-algebra command.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import GeneratorId as G
from .algebra import QuadraticOperator, bracket, generator


@dataclass(frozen=True)
class Relation:
    left: G
    right: G
    rhs: dict


def _k(axis: str, sign: str) -> G:
    return {("x", "+"): G.KpX, ("x", "-"): G.KmX, ("x", "0"): G.K0X,
            ("y", "+"): G.KpY, ("y", "-"): G.KmY, ("y", "0"): G.K0Y}[(axis, sign)]


def _build() -> list[Relation]:
    rel: list[Relation] = []
    # same-axis K algebra: [K0, Kpm] = 2 K_mp, [K+, K-] = 2 K0
    for z in ("x", "y"):
        rel.append(Relation(_k(z, "0"), _k(z, "+"), {_k(z, "-"): 2.0}))
        rel.append(Relation(_k(z, "0"), _k(z, "-"), {_k(z, "+"): 2.0}))
        rel.append(Relation(_k(z, "+"), _k(z, "-"), {_k(z, "0"): 2.0}))
    # cross-axis K's commute
    for sa in ("+", "-", "0"):
        for sb in ("+", "-", "0"):
            rel.append(Relation(_k("x", sa), _k("y", sb), {}))
    # K0 with J and I
    rel += [
        Relation(G.K0X, G.Jp, {G.Jm: -1.0}),
        Relation(G.K0X, G.Jm, {G.Jp: -1.0}),
        Relation(G.K0Y, G.Jp, {G.Jm: +1.0}),
        Relation(G.K0Y, G.Jm, {G.Jp: +1.0}),
        Relation(G.K0X, G.Ip, {G.Im: -1.0}),
        Relation(G.K0X, G.Im, {G.Ip: -1.0}),
        Relation(G.K0Y, G.Ip, {G.Im: -1.0}),
        Relation(G.K0Y, G.Im, {G.Ip: -1.0}),
    ]
    # K_pm with J_pm
    rel += [
        Relation(G.KpX, G.Jp, {G.Im: +1.0}),
        Relation(G.KmX, G.Jp, {G.Ip: -1.0}),
        Relation(G.KpY, G.Jp, {G.Im: +1.0}),
        Relation(G.KmY, G.Jp, {G.Ip: -1.0}),
        Relation(G.KpX, G.Jm, {G.Ip: -1.0}),
        Relation(G.KmX, G.Jm, {G.Im: +1.0}),
        Relation(G.KpY, G.Jm, {G.Ip: +1.0}),
        Relation(G.KmY, G.Jm, {G.Im: -1.0}),
    ]
    # K_pm with I_pm
    rel += [
        Relation(G.KpX, G.Ip, {G.Jm: +1.0}),
        Relation(G.KmX, G.Ip, {G.Jp: -1.0}),
        Relation(G.KpY, G.Ip, {G.Jm: -1.0}),
        Relation(G.KmY, G.Ip, {G.Jp: -1.0}),
        Relation(G.KpX, G.Im, {G.Jp: -1.0}),
        Relation(G.KmX, G.Im, {G.Jm: +1.0}),
        Relation(G.KpY, G.Im, {G.Jp: -1.0}),
        Relation(G.KmY, G.Im, {G.Jm: -1.0}),
    ]
    # mixed rows
    rel += [
        Relation(G.Jp, G.Jm, {G.K0X: 0.5, G.K0Y: -0.5}),
        Relation(G.Ip, G.Im, {G.K0X: -0.5, G.K0Y: -0.5}),
        Relation(G.Jp, G.Ip, {G.KmX: 0.5, G.KmY: 0.5}),
        Relation(G.Jp, G.Im, {G.KpX: -0.5, G.KpY: -0.5}),
        Relation(G.Jm, G.Ip, {G.KpX: -0.5, G.KpY: 0.5}),
        Relation(G.Jm, G.Im, {G.KmX: 0.5, G.KmY: -0.5}),
    ]
    return rel


COMMUTATION_TABLE: list[Relation] = _build()


def relation_rhs(entry: Relation) -> QuadraticOperator:
    out = QuadraticOperator(np.zeros((4, 4)))
    for gid, w in entry.rhs.items():
        out = out + w * generator(gid)
    return out


def relation_error(entry: Relation) -> float:
    got = bracket(generator(entry.left), generator(entry.right))
    want = relation_rhs(entry)
    return float(np.abs(got.coeff - want.coeff).max())
