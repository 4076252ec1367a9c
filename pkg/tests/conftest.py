"""Shared fixtures: one session-wide cache of models, triples, and flows.

Everything heavy (reference profiles, coefficient solves, level-set flows)
is memoized by key, so the acceptance matrix and the unit tests share work
instead of rebuilding it per test.
"""

import pytest

from masscap import (
    case_report,
    family_bumped,
    family_flat_exterior,
    family_schwarzschild,
    level_flow,
    model_profile,
    solve_decaying,
    solve_growing,
)

P_GRID = (1.2, 1.5, 1.8)
SCHWARZSCHILD_MASSES = (1.0, 2.0, 5.0)
BUMP_EPSILONS = (0.05, 0.1)


class Lab:
    """Memoizing builder for every expensive object the tests share."""

    def __init__(self):
        self._models = {}
        self._triples = {}
        self._warps = {}
        self._flows = {}
        self._reports = {}

    def model(self, p):
        if p not in self._models:
            self._models[p] = model_profile(p)
        return self._models[p]

    def triples(self, p):
        """(decaying, growing) coefficient solutions on the reference slice."""
        if p not in self._triples:
            model = self.model(p)
            self._triples[p] = (solve_decaying(model), solve_growing(model))
        return self._triples[p]

    def warp(self, tag, **params):
        key = (tag, tuple(sorted(params.items())))
        if key not in self._warps:
            if tag == "schwarzschild":
                self._warps[key] = family_schwarzschild(**params)
            elif tag == "bumped":
                self._warps[key] = family_bumped(**params)
            elif tag == "flat":
                self._warps[key] = family_flat_exterior(**params)
            else:
                raise ValueError(f"unknown family tag {tag!r}")
        return self._warps[key]

    def flow(self, p, tag, **params):
        key = (p, tag, tuple(sorted(params.items())))
        if key not in self._flows:
            self._flows[key] = level_flow(self.warp(tag, **params), p)
        return self._flows[key]

    def report(self, p, tag, **params):
        key = (p, tag, tuple(sorted(params.items())))
        if key not in self._reports:
            dec, grow = self.triples(p)
            self._reports[key] = case_report(
                self.flow(p, tag, **params), self.model(p), dec, grow
            )
        return self._reports[key]


@pytest.fixture(scope="session")
def lab():
    return Lab()
