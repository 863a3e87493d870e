"""Exception types raised across the package."""


class GeostatError(Exception):
    """Base class for all library errors."""


class InvalidScenario(GeostatError, ValueError):
    pass


class DegenerateScenario(GeostatError, ValueError):
    """L is an exact multiple of r0, so every lens has zero width."""


class DirectConnection(GeostatError, ValueError):
    """Source and destination are within range (k = 1); there are no lenses."""


class InvalidInterval(GeostatError, ValueError):
    pass


class WrongHopCount(GeostatError, ValueError):
    pass


class CountOverflow(GeostatError, OverflowError):
    """A path count did not fit the requested fixed-width integer type."""


class UnsupportedK(GeostatError, ValueError):
    pass


class TermBudgetExceeded(GeostatError, ValueError):
    pass


class CyclicOrder(GeostatError, ValueError):
    pass


class SizeExceeded(GeostatError, ValueError):
    pass


class AlgorithmMismatch(GeostatError, RuntimeError):
    """BFS and lens-chain counting disagreed on one realisation.

    Carries everything needed to replay the offending trial.
    """

    def __init__(self, trial, root_seed, bfs_sigma, chain_sigma, positions):
        self.trial = trial
        self.root_seed = root_seed
        self.bfs_sigma = bfs_sigma
        self.chain_sigma = chain_sigma
        self.positions = tuple(positions)
        super().__init__(
            f"trial {trial} (root seed {root_seed}): bfs sigma={bfs_sigma} "
            f"but lens-chain sigma={chain_sigma}; positions={list(self.positions)!r}"
        )
