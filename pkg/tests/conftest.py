import pytest

from gramfeas.ami import parse_ami
from gramfeas.generate import contradiction_instance, planted_instance


@pytest.fixture
def golden_ami():
    """x1 = 1, x2 = x1 + x1, x3 = x2 * x2, forced solution (1, 2, 4)."""
    return parse_ami("vars 3\nconst 1\nadd 2 1 1\nmul 3 2 2\n")


@pytest.fixture
def anchors_gram():
    from gramfeas.gram import parse_gram

    return parse_gram(
        "gram rank 2 rows 2\nentry 1 1 1\nentry 2 2 1\nentry 1 2 0\n"
    )


def planted_corpus(count, *, seed0=0, n_max=8, m_max=16):
    corpus = []
    for seed in range(seed0, seed0 + count):
        n = 1 + seed % n_max
        m = seed % (m_max + 1)
        corpus.append(planted_instance(seed, n, m))
    return corpus


def mixed_corpus(count, *, seed0=0, n_max=5, m_max=8):
    """Alternating planted-feasible and contradiction-infeasible instances."""
    corpus = []
    for seed in range(seed0, seed0 + count):
        n = 2 + seed % (n_max - 1)
        m = 2 + seed % (m_max - 1)
        if seed % 2 == 0:
            inst, assignment = planted_instance(seed, n, m)
            corpus.append((inst, assignment, True))
        else:
            corpus.append((contradiction_instance(seed, n, m), None, False))
    return corpus
