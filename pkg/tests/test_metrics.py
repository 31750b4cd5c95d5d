import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaitrel.errors import InvalidInput
from gaitrel.metrics import ConfusionMatrix2, confusion_matrix, evaluate, macro_f1, precision_recall

VALIDATION = ConfusionMatrix2.from_flat([191, 43, 56, 193])
TEST = ConfusionMatrix2.from_flat([319, 102, 100, 330])

counts = st.lists(st.integers(0, 10_000), min_size=4, max_size=4)


def brute_macro_f1(c):
    """Per-class F1 from raw counts, written out longhand."""
    f1s = []
    for k in (0, 1):
        tp = c[k][k]
        fp = c[1 - k][k]
        fn = c[k][1 - k]
        f1s.append(0.0 if tp == 0 else 2 * tp / (2 * tp + fp + fn))
    return sum(f1s) / 2


class TestConfusionMatrix:
    def test_all_correct(self):
        pairs = [(0, 0)] * 3 + [(1, 1)] * 2
        assert confusion_matrix(pairs).counts.tolist() == [[3, 0], [0, 2]]

    def test_single_pair(self):
        assert confusion_matrix([(0, 1)]).counts.tolist() == [[0, 1], [0, 0]]

    def test_empty(self):
        with pytest.raises(InvalidInput):
            confusion_matrix([])

    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=200))
    def test_brute_force_counts(self, pairs):
        m = confusion_matrix(pairs)
        assert m.total == len(pairs)
        for t in (0, 1):
            for p in (0, 1):
                assert m.counts[t, p] == sum(1 for a, b in pairs if a == t and b == p)

    def test_rejects_bad_counts(self):
        with pytest.raises(InvalidInput):
            ConfusionMatrix2(np.array([[1, -1], [0, 0]]))
        with pytest.raises(InvalidInput):
            ConfusionMatrix2.from_flat([1, 2, 3])


class TestPrecisionRecall:
    def test_table_one_validation_female(self):
        pr = precision_recall(VALIDATION, 0)
        assert pr.precision == pytest.approx(191 / 247) == pytest.approx(0.7733, abs=5e-5)
        assert pr.recall == pytest.approx(191 / 234) == pytest.approx(0.8162, abs=5e-5)
        assert not pr.degenerate

    def test_perfect(self):
        assert precision_recall(ConfusionMatrix2.from_flat([4, 0, 0, 9]), 1)[:2] == (1.0, 1.0)

    def test_empty_predicted_column(self):
        pr = precision_recall(ConfusionMatrix2.from_flat([0, 5, 0, 5]), 0)
        assert pr.precision == 0.0 and pr.degenerate


class TestMacroF1:
    def test_table_one_validation(self):
        assert macro_f1(VALIDATION) == pytest.approx(0.795, abs=0.0005)

    def test_table_one_test_block(self):
        assert macro_f1(TEST) == pytest.approx(0.7626, abs=0.0010)

    @pytest.mark.parametrize("a,b", [(1, 1), (50, 3), (7, 200)])
    def test_perfect_diagonal(self, a, b):
        assert macro_f1(ConfusionMatrix2.from_flat([a, 0, 0, b])) == 1.0

    @given(counts)
    def test_matches_longhand(self, c):
        m = ConfusionMatrix2.from_flat(c)
        assert macro_f1(m) == pytest.approx(brute_macro_f1(m.counts.tolist()), abs=1e-12)

    @given(counts)
    def test_relabel_invariance(self, c):
        m = ConfusionMatrix2.from_flat(c)
        swapped = ConfusionMatrix2(m.counts[::-1, ::-1])
        assert macro_f1(swapped) == pytest.approx(macro_f1(m), abs=1e-12)

    @given(counts, st.integers(1, 50))
    def test_scale_invariance(self, c, k):
        m = ConfusionMatrix2.from_flat(c)
        scaled = ConfusionMatrix2(m.counts * k)
        assert macro_f1(scaled) == pytest.approx(macro_f1(m), abs=1e-12)
        for cls in (0, 1):
            assert precision_recall(scaled, cls) == pytest.approx(precision_recall(m, cls))

    @given(counts)
    def test_range_and_perfection(self, c):
        m = ConfusionMatrix2.from_flat(c)
        f = macro_f1(m)
        assert 0.0 <= f <= 1.0
        both_present = m.counts[0].sum() > 0 and m.counts[1].sum() > 0
        if both_present:
            assert (f == 1.0) == (m.counts[0, 1] == 0 and m.counts[1, 0] == 0)


def test_report_json():
    d = evaluate(VALIDATION).to_dict()
    assert d["confusion_matrix"] == [[191, 43], [56, 193]]
    assert d["macro_f1"] == round(macro_f1(VALIDATION), 6)
    assert all(isinstance(v, int) for row in d["confusion_matrix"] for v in row)
    assert d["degenerate"] is False
