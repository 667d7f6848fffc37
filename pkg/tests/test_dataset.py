import numpy as np
import pytest
from scipy import stats

from gfra.airlink import matched_filter, slot_from_positions
from gfra.channel import PathLossParams, RadioParams, tx_snr_linear
from gfra.multiplicity.dataset import Dataset, draw_multiplicities, gen_dataset, synthesize_energies
from gfra.scene import AreaSpec, TrafficSpec, derive_stream, make_grid_deployment

DEP = make_grid_deployment(4, 4, AreaSpec(1000), 2)
PL, RADIO = PathLossParams(), RadioParams()


def small(q=400, **kw):
    return gen_dataset(q, DEP, TrafficSpec(), PL, RADIO, 4, seed=3, **kw)


def test_no_activity_gives_noise_only_samples():
    ds = gen_dataset(10, DEP, TrafficSpec(2000, 0.0, 20), PL, RADIO, 4, seed=0)
    assert not ds.labels.any()
    # per-antenna noise energy has mean 1/(rho_T L)
    ds = gen_dataset(4000, DEP, TrafficSpec(2000, 0.0, 20), PL, RADIO, 4, seed=0)
    ref = 1 / (tx_snr_linear(RADIO) * 20)
    assert abs(ds.features.mean() / ref - 1) < 0.02


def test_label_law_matches_truncated_binomial():
    b = draw_multiplicities(100_000, TrafficSpec(), 4, derive_stream(0, "labels"))
    pmf = stats.binom.pmf(np.arange(5), 2000, 5e-4)
    pmf /= pmf.sum()
    np.testing.assert_allclose(np.bincount(b, minlength=5) / b.size, pmf, atol=0.01)
    assert b.max() <= 4


def test_split_sizes():
    ds = small(1000)
    counts = np.bincount(ds.split, minlength=3)
    assert abs(counts[0] - 800) <= 1 and abs(counts[1] - 100) <= 1


def test_worker_count_does_not_matter():
    a = gen_dataset(4500, DEP, TrafficSpec(), PL, RADIO, 4, seed=9, workers=1)
    b = gen_dataset(4500, DEP, TrafficSpec(), PL, RADIO, 4, seed=9, workers=3)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.split, b.split)


def test_csv_round_trip(tmp_path):
    ds = small(50)
    path = tmp_path / "d.csv"
    ds.to_csv(path)
    head = path.read_text().splitlines()[0]
    assert head.startswith("#gfra-dataset") and "M=16" in head and "S=2" in head
    back = Dataset.from_csv(path)
    for name in ("train", "val", "test"):
        np.testing.assert_array_equal(back.part(name)[0], ds.part(name)[0])
        np.testing.assert_array_equal(back.part(name)[1], ds.part(name)[1])
    assert back.meta["S"] == 2


def test_csv_wrong_width(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("#gfra-dataset M=3 n_train=1 n_val=0 n_test=0\n1,0.5,0.5\n")
    with pytest.raises(ValueError):
        Dataset.from_csv(path)


def test_vectorised_energies_follow_matched_filter_law():
    """The batched generator and the slot-level matched filter draw from the same law."""
    n = 3000
    b = np.full(n, 2)
    fast = synthesize_energies(b, DEP, PL, RADIO, 20, derive_stream(1, "fast"))
    slow = np.empty_like(fast)
    for i in range(n):
        rng = derive_stream(1, ["slow", i])
        pos = rng.uniform(0, 1000, size=(2, 2))
        slot = slot_from_positions(DEP, pos, [0, 0], PL, rng, n_preambles=20)
        slow[i] = matched_filter(slot, 0, RADIO, rng).energy
    for col in (0, 5):
        f = np.log10(np.sort(fast, axis=1)[:, -1 - col])
        s = np.log10(np.sort(slow, axis=1)[:, -1 - col])
        assert stats.ks_2samp(f, s).pvalue > 0.001
