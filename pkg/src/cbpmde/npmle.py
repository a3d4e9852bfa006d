"""Nonparametric maximum likelihood estimate of the offspring law from a family tree."""

from fractions import Fraction

from .cbp import totals
from .dist import Pmf
from .errors import NoProgenitorsError


def npmle(tree):
    """
    Relative frequency of each offspring count over all observed progenitors.

    The returned pmf lives on the observed support ``0..max k`` with no tail.
    Raises :class:`NoProgenitorsError` when no individual ever reproduced.
    """
    tot = totals(tree)
    if tot.delta == 0:
        raise NoProgenitorsError("the tree has no progenitors (Delta = 0)")
    return Pmf(tot.y / tot.delta)


def npmle_exact(tree):
    """Same estimate as a list of exact fractions."""
    tot = totals(tree)
    if tot.delta == 0:
        raise NoProgenitorsError("the tree has no progenitors (Delta = 0)")
    return [Fraction(int(c), tot.delta) for c in tot.y]
