import pytest

from plumbsw import LatticeContext
from plumbsw.corpus import FIXTURES, chain


@pytest.fixture(scope="session")
def ctxs():
    """Contexts for the five fixture graphs plus a few small extras."""
    out = {name: LatticeContext(g) for name, g in FIXTURES.items()}
    out["L5"] = LatticeContext(chain([-5]))
    out["A3"] = LatticeContext(chain([-2, -2, -2]))
    out["C23"] = LatticeContext(chain([-2, -3]))
    out["C32"] = LatticeContext(chain([-3, -2]))
    return out


@pytest.fixture
def write_graph(tmp_path):
    def write(text, name="g.txt"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write
