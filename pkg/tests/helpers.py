"""Shared generators for tests."""

import itertools
import random
from fractions import Fraction

from cstnet.cst import cst_network
from cstnet.network import Complex, Reaction, ReactionNetwork


def duplicated_cycle(kinds, a, b) -> bool:
    """Two-species all-sequestration cycles with ``a == b`` list one reaction twice."""
    return len(kinds) == 2 and tuple(kinds) == ("S", "S") and tuple(a) == tuple(b)


def all_fully_open_csts(ns=(2, 3, 4), coeffs=(1, 2, 3), **flows):
    """Yield ``(kinds, a, b, network)`` for every CST in the grid (fully open by default)."""
    flows = flows or {"inflows": "all", "outflows": "all"}
    for n in ns:
        for kinds in itertools.product("ST", repeat=n):
            for a in itertools.product(coeffs, repeat=n):
                for b in itertools.product(coeffs, repeat=n):
                    if duplicated_cycle(kinds, a, b):
                        continue
                    yield kinds, a, b, cst_network(kinds, a, b, **flows)


def random_complex(rng: random.Random, species, max_terms=3, max_coef=3) -> Complex:
    k = rng.randint(0, max_terms)
    names = rng.sample(species, min(k, len(species)))
    return Complex({s: rng.randint(1, max_coef) for s in names})


def random_rate(rng: random.Random):
    choice = rng.random()
    if choice < 0.3:
        return None
    if choice < 0.6:
        return Fraction(rng.randint(1, 9))
    return Fraction(rng.randint(1, 50), rng.randint(1, 20))


def random_network(rng: random.Random, max_species=5, max_reactions=8) -> ReactionNetwork:
    pool = ["X1", "X2", "Y", "R*VR*", "VRRΔ", "a_b", "Z'", "Q^2"][: rng.randint(1, max_species)]
    reactions, seen = [], set()
    target = rng.randint(1, max_reactions)
    while len(reactions) < target:
        src, tgt = random_complex(rng, pool), random_complex(rng, pool)
        if src == tgt or (src, tgt) in seen:
            continue
        seen.add((src, tgt))
        reactions.append(Reaction(src, tgt, random_rate(rng)))
    return ReactionNetwork(reactions)
