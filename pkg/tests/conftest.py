import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hybridclique.graph import Graph, parse_text  # noqa: E402

# Edge order chosen so first-appearance ids give c=0, b=1, e=2, f=3, d=4, a=5;
# with smallest-index tie breaking the peel order is then c, b, e, f, d, a.
FIG3_TEXT = "c b\ne f\nd e\na b\nf a\nc d\na d\n"


@pytest.fixture
def fig3() -> Graph:
    return parse_text(FIG3_TEXT)


def vid(g: Graph, label: str) -> int:
    return g.labels.index(label)


def random_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    return Graph.from_edges(n, np.stack([iu[keep], ju[keep]], axis=1))
