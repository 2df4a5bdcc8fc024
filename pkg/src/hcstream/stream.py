"""Edge streams with arrival orders, pass auditing and word metering."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from hcstream.errors import HarnessError, InvalidArgumentError, StreamError
from hcstream.graph import EdgeFileReader, WeightedGraph

logger = logging.getLogger(__name__)


class ArrivalOrder(str, Enum):
    NATURAL = "natural"
    SHUFFLED = "shuffled"
    ADVERSARIAL = "adversarial"


@dataclass
class Meter:
    """Words of algorithm-owned storage, current and peak, plus passes."""

    words_now: int = 0
    words_peak: int = 0
    passes: int = 0

    def store(self, words: int) -> None:
        self.words_now += words
        if self.words_now > self.words_peak:
            self.words_peak = self.words_now

    def release(self, words: int) -> None:
        if words > self.words_now:
            raise HarnessError(f"Releasing {words} words but only {self.words_now} are stored")
        self.words_now -= words

    def to_dict(self) -> dict[str, int]:
        return {"words_now": self.words_now, "words_peak": self.words_peak, "passes": self.passes}


class EdgeStream:
    """Ordered edge arrivals over a graph, a graph file or a one-shot iterable.

    Each pass delivers every edge once. The read cursor only moves forward
    within a pass; a new pass needs rewind(), and reading beyond pass_budget
    passes raises HarnessError.
    """

    def __init__(
        self,
        n: int,
        declared_edges: int,
        *,
        graph: WeightedGraph | None = None,
        path: Path | None = None,
        edges: Iterable[tuple[int, int, float]] | None = None,
        order: ArrivalOrder | str = ArrivalOrder.NATURAL,
        seed: int = 0,
        bipartition: Iterable[int] | None = None,
        pass_budget: int | None = None,
    ):
        self.n = n
        self.declared_edges = declared_edges
        self.order = ArrivalOrder(order)
        self.seed = seed
        self.pass_budget = pass_budget
        self.position = 0
        self.passes_used = 0
        self._graph = graph
        self._path = Path(path) if path is not None else None
        self._edges = edges
        self._side = None
        self._reading = False
        if self.order is ArrivalOrder.ADVERSARIAL:
            if bipartition is None:
                raise InvalidArgumentError("The adversarial order needs a bipartition side")
            self._side = np.zeros(n, dtype=bool)
            self._side[np.fromiter(bipartition, dtype=np.int64)] = True
        if edges is not None and self.order is not ArrivalOrder.NATURAL:
            raise InvalidArgumentError("One-shot streams only support the natural order")

    @classmethod
    def from_graph(cls, g: WeightedGraph, **kwargs) -> EdgeStream:
        return cls(g.n, g.m, graph=g, **kwargs)

    @classmethod
    def from_file(cls, path: Path, **kwargs) -> EdgeStream:
        reader = EdgeFileReader(path)
        return cls(reader.n, reader.m, path=path, **kwargs)

    @classmethod
    def from_iterable(
        cls, n: int, declared_edges: int, edges: Iterable[tuple[int, int, float]], **kwargs
    ) -> EdgeStream:
        return cls(n, declared_edges, edges=edges, **kwargs)

    @property
    def rewindable(self) -> bool:
        return self._edges is None

    # -------------------------------------------------------------------------
    # Passes
    # -------------------------------------------------------------------------

    def rewind(self) -> None:
        """Reset the cursor for a new pass."""
        if not self.rewindable:
            raise HarnessError("This stream is backed by a one-shot iterable and cannot rewind")
        self.position = 0
        self._reading = False
        self.passes_used += 1

    def _raw_edges(self) -> Iterator[tuple[int, int, float]]:
        if self._graph is not None:
            yield from self._graph.edges
        elif self._path is not None:
            yield from EdgeFileReader(self._path)
        else:
            assert self._edges is not None
            yield from self._edges

    def _ordered(self) -> Iterator[tuple[int, int, float]]:
        if self.order is ArrivalOrder.NATURAL:
            yield from self._raw_edges()
            return
        arrivals = list(self._raw_edges())
        if self.order is ArrivalOrder.SHUFFLED:
            rng = np.random.default_rng(self.seed)
            for i in rng.permutation(len(arrivals)):
                yield arrivals[i]
            return
        side = self._side
        assert side is not None
        yield from (e for e in arrivals if side[e[0]] == side[e[1]])
        yield from (e for e in arrivals if side[e[0]] != side[e[1]])

    def __iter__(self) -> Iterator[tuple[int, int, float]]:
        if self._reading or self.position > 0:
            raise HarnessError("Stream already read in this pass; rewind before reading again")
        if self.passes_used == 0:
            self.passes_used = 1
        if self.pass_budget is not None and self.passes_used > self.pass_budget:
            raise HarnessError(
                f"Pass budget exceeded: pass {self.passes_used} of {self.pass_budget} allowed"
            )
        self._reading = True
        for edge in self._ordered():
            if self.position >= self.declared_edges:
                raise StreamError(f"Stream delivered more than the declared {self.declared_edges} edges")
            self.position += 1
            yield edge
        if self.position < self.declared_edges:
            raise StreamError(
                f"Stream ended after {self.position} of {self.declared_edges} declared edges"
            )
        logger.debug("Stream pass %d delivered %d edges", self.passes_used, self.position)


def rewind(stream: EdgeStream) -> None:
    stream.rewind()
