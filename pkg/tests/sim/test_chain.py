import pytest

from appease.sim import ChainCursor, Segment, Step, chain_calls


def _segments(*pids):
    return [Segment(pid, 1000) for pid in pids]


def test_three_part_chain():
    cursor = ChainCursor(1, _segments(1, 2, 1))
    assert cursor.holder == 1
    assert cursor.advance() == Step('call', 1, 2)
    assert cursor.holder == 2
    assert cursor.advance() == Step('return', 1, 2)
    assert cursor.advance() == Step('respond', 1)
    assert cursor.finished
    with pytest.raises(ValueError):
        cursor.advance()


def test_nested_calls():
    assert chain_calls(1, _segments(1, 2, 3, 2, 1)) == [(1, 2), (2, 3)]
    assert chain_calls(1, _segments(1, 2, 1, 3, 1)) == [(1, 2), (1, 3)]
    assert chain_calls(1, _segments(1)) == []


@pytest.mark.parametrize("pids", [
    (2, 1),  # starts elsewhere
    (1, 2),  # ends elsewhere
    (1, 1),  # consecutive segments
    (1, 2, 3, 1),  # skips a caller
    (),
])
def test_malformed_chains(pids):
    with pytest.raises(ValueError):
        chain_calls(1, _segments(*pids))


def test_open_calls_at_the_end():
    cursor = ChainCursor(1, _segments(1, 2))
    cursor.advance()
    with pytest.raises(ValueError):
        cursor.advance()


def test_segment_demand():
    with pytest.raises(ValueError):
        Segment(1, 0)
