"""Coordinated pilot assignment: the normalized sum-MSE network utility
and the greedy one-user-per-cell selection that minimizes it, with an
exhaustive search as the optimality oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .channel import NetworkScenario
from .covariance import link_covariance
from .estimators import analytic_mse_single

EXHAUSTIVE_BUDGET = 100_000


@dataclass
class AssignmentState:
    """Ordered selection of (cell, user) pairs sharing the pilot; at most
    one user per cell."""

    selected: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        cells = [c for c, _ in self.selected]
        if len(set(cells)) != len(cells):
            raise ValueError("at most one selected user per cell")

    def users(self) -> dict[int, int]:
        return dict(self.selected)


def network_utility(state: AssignmentState, scenario: NetworkScenario) -> float:
    """Sum over selected cells of the single-channel estimation MSE
    normalized by the desired covariance trace.

    Cells without a selected user do not contribute: partial selections are
    scored on the already-assigned cells only.
    """
    if not state.selected:
        raise ValueError("network utility undefined for an empty selection")
    total = 0.0
    for cell_j, user_j in state.selected:
        desired = link_covariance(scenario, cell_j, user_j, cell_j)
        covs = [desired.entries]
        covs += [
            link_covariance(scenario, cell_l, user_l, cell_j).entries
            for cell_l, user_l in state.selected
            if cell_l != cell_j
        ]
        mse = analytic_mse_single(covs, scenario.noise_var, scenario.pilot_len)
        total += mse / desired.trace()
    return total


def greedy_assign(scenario: NetworkScenario) -> AssignmentState:
    """Grow the selection cell by cell, picking in each cell the user that
    minimizes the utility of the partial selection. Ties break toward the
    smallest user index; the result is deterministic for a given scenario.
    """
    state = AssignmentState()
    for cell in range(scenario.num_cells):
        best_user = None
        best_value = np.inf
        for user in range(scenario.users_per_cell):
            candidate = AssignmentState(state.selected + [(cell, user)])
            value = network_utility(candidate, scenario)
            if value < best_value:
                best_value = value
                best_user = user
        state = AssignmentState(state.selected + [(cell, best_user)])
    return state


def exhaustive_assign(scenario: NetworkScenario) -> AssignmentState:
    """Minimize the utility over all K^L joint selections (oracle).

    Ties break toward the lexicographically smallest user tuple. Refuses
    searches beyond EXHAUSTIVE_BUDGET combinations.
    """
    k, ll = scenario.users_per_cell, scenario.num_cells
    if k**ll > EXHAUSTIVE_BUDGET:
        raise ValueError(f"exhaustive search over {k}^{ll} assignments exceeds the {EXHAUSTIVE_BUDGET} budget")
    best_state = None
    best_value = np.inf
    for users in product(range(k), repeat=ll):
        state = AssignmentState(list(enumerate(users)))
        value = network_utility(state, scenario)
        if value < best_value:
            best_value = value
            best_state = state
    return best_state
