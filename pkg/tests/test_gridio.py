import numpy as np
import pytest

from walsh_hp import gridio


@pytest.mark.parametrize("shape", [(1,), (8,), (1, 1), (4, 4)])
@pytest.mark.parametrize("tag", gridio.TAGS)
def test_round_trips(shape, tag, rng, tmp_path):
    v = rng.standard_normal(shape) / 3
    got, t = gridio.loads(gridio.dumps(v, tag))
    assert t == tag and np.array_equal(got, v)
    got, t = gridio.from_bytes(gridio.to_bytes(v, tag))
    assert t == tag and np.array_equal(got, v)
    for name in ("g.txt", "g.bin"):
        gridio.save(tmp_path / name, v, tag)
        got, t = gridio.load(tmp_path / name)
        assert t == tag and np.array_equal(got, v)


def test_rejects_garbage():
    with pytest.raises(ValueError):
        gridio.loads("hello\n1 2\n")
    with pytest.raises(ValueError):
        gridio.from_bytes(b"NOTAGRID" + bytes(8))
    with pytest.raises(ValueError):
        gridio.dumps(np.ones(3))
