import random

from hypothesis import strategies as st

from treecq.tree import random_tree


@st.composite
def trees(draw, max_nodes=12, labels=("A", "B"), multi=False):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(1, max_nodes))
    return random_tree(random.Random(seed), n, labels, multi=multi)
