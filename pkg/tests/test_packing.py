import itertools
import json
import math

import numpy as np
import pytest
from scipy.spatial import cKDTree

from packcert.errors import ContainerExceedsGeneration, PackingValidationError
from packcert.packing import (
    GridIndex,
    Packing,
    density,
    dumps,
    from_dict,
    generate_cubic,
    generate_fcc,
    generate_random_saturated,
    is_saturated,
    load,
    neighbors,
    save,
    to_dict,
)


def brute_fcc_count(radius):
    # FCC with min distance 2: sqrt(2) * {integer points with even coordinate sum}
    n = int(radius / math.sqrt(2)) + 2
    count = 0
    for x, y, z in itertools.product(range(-n, n + 1), repeat=3):
        if (x + y + z) % 2 == 0 and 2 * (x * x + y * y + z * z) <= radius * radius + 1e-9:
            count += 1
    return count


def monte_carlo_density(p, r, n, rng, chunk=1_000_000):
    tree = cKDTree(p.centers)
    hits = 0
    done = 0
    while done < n:
        m = min(chunk, n - done)
        d = rng.normal(size=(m, 3))
        d *= (r * rng.uniform(size=m) ** (1 / 3) / np.linalg.norm(d, axis=1))[:, None]
        hits += int(np.count_nonzero(tree.query(d, k=1, distance_upper_bound=1.0 + 1e-12)[0] <= 1.0))
        done += m
    est = hits / n
    return est, math.sqrt(est * (1 - est) / n)


def test_grid_index_matches_brute_force(rng):
    pts = rng.uniform(-10, 10, size=(500, 3))
    idx = GridIndex(pts)
    for _ in range(50):
        q = rng.uniform(-11, 11, size=3)
        cut = rng.uniform(0.5, 8)
        want = np.flatnonzero(np.linalg.norm(pts - q, axis=1) <= cut)
        assert np.array_equal(idx.query(q, cut), want)


def test_fcc_count_and_shells(fcc12):
    assert len(fcc12) == brute_fcc_count(12)
    v = int(np.argmin(np.linalg.norm(fcc12.centers, axis=1)))
    d = np.linalg.norm(fcc12.centers - fcc12.centers[v], axis=1)
    d = d[d > 0]
    assert np.sum(np.isclose(d, 2.0)) == 12
    assert not np.any((d > 2 + 1e-9) & (d <= 2.52))
    assert d.min() == pytest.approx(2.0)
    assert len(neighbors(fcc12, v, 2.52)) == 12
    assert len(neighbors(fcc12, v, 1.9)) == 0


def test_cubic(cubic12):
    v = int(np.argmin(np.linalg.norm(cubic12.centers, axis=1)))
    assert len(neighbors(cubic12, v, 2.52)) == 6
    cert = is_saturated(cubic12, 8, 0.25)
    assert cert.worst_gap == pytest.approx(math.sqrt(3), abs=1e-9)
    assert cert.saturated


def test_fcc_saturation(fcc12):
    cert = is_saturated(fcc12, 8, 0.25)
    assert cert.saturated
    # covering radius of this FCC is sqrt(2); the probe grid can only get close to it
    assert math.sqrt(2) - 0.05 < cert.worst_gap <= math.sqrt(2) + 1e-9


def test_generators_need_radius_4():
    with pytest.raises(ValueError):
        generate_fcc(2)
    with pytest.raises(ValueError):
        generate_random_saturated(3, 1)


def test_random_deterministic_and_valid():
    a = generate_random_saturated(8, 5)
    b = generate_random_saturated(8, 5)
    assert dumps(a) == dumps(b)
    assert dumps(a) != dumps(generate_random_saturated(8, 6))
    d, _ = cKDTree(a.centers).query(a.centers, k=2)
    assert d[:, 1].min() >= 2 - 1e-9
    assert np.linalg.norm(a.centers, axis=1).max() <= 8 + 1e-9
    assert is_saturated(a, 7, 0.25).saturated


def test_random_saturation_finer_grid(random10):
    for p in list(random10.values())[:5]:
        assert is_saturated(p, 9, 0.1).worst_gap < 2


def test_single_ball_unsaturated():
    p = Packing(np.zeros((1, 3)), 5.0, "custom")
    assert not is_saturated(p, 3, 0.25).saturated


def test_density_single_ball():
    p = Packing(np.zeros((1, 3)), 5.0, "custom")
    assert density(p, 1) == pytest.approx(1.0, abs=1e-15)
    assert density(p, 2) == pytest.approx(1 / 8, abs=1e-15)
    with pytest.raises(ContainerExceedsGeneration):
        density(p, 4.5)
    with pytest.raises(ContainerExceedsGeneration):
        density(p, 0.5)


@pytest.mark.parametrize("r", [5.0, 8.0])
def test_density_monte_carlo_fcc(fcc12, r, rng):
    est, se = monte_carlo_density(fcc12, r, 1_000_000, rng)
    assert abs(density(fcc12, r) - est) <= 3 * se


def test_density_monte_carlo_random(random10, rng):
    p = random10[3]
    est, se = monte_carlo_density(p, 6.0, 1_000_000, rng)
    assert abs(density(p, 6.0) - est) <= 3 * se


def test_fcc_density_approaches_limit(fcc12):
    assert abs(density(fcc12, 10) - math.pi / math.sqrt(18)) < 0.05


def test_save_load_roundtrip(tmp_path):
    p = generate_fcc(6)
    path = tmp_path / "fcc.json"
    save(p, path)
    q = load(path)
    assert q == p
    assert dumps(q) == path.read_text()
    assert not list(tmp_path.glob("*.tmp"))


def test_load_rejects_bad_files(tmp_path):
    doc = {"kind": "custom", "seed": None, "gen_radius": 5.0, "centers": [[0, 0, 0], [1, 0, 0]]}
    bad = tmp_path / "close.json"
    bad.write_text(json.dumps(doc))
    with pytest.raises(PackingValidationError):
        load(bad)
    del doc["gen_radius"]
    with pytest.raises(PackingValidationError):
        from_dict(doc)
    (tmp_path / "junk.json").write_text("{not json")
    with pytest.raises(PackingValidationError):
        load(tmp_path / "junk.json")
    with pytest.raises(PackingValidationError):
        from_dict({"kind": "hexagonal", "seed": None, "gen_radius": 5.0, "centers": []})


def test_to_dict_fields(fcc8):
    d = to_dict(fcc8)
    assert set(d) == {"kind", "seed", "gen_radius", "centers"}
    assert d["kind"] == "fcc" and d["seed"] is None
