from typing_extensions import Annotated

from skewlab.helpers import extract_type, format_float, make_rng


def test_extract_type() -> None:
    assert (int, "x") == extract_type(Annotated[int, "x"])
    assert (float, None) == extract_type(float)


def test_rng_is_seeded() -> None:
    assert make_rng(5).uniform(size=4).tolist() == make_rng(5).uniform(size=4).tolist()
    assert make_rng(5).uniform() != make_rng(6).uniform()
    assert make_rng(-1).uniform() == make_rng(2**64 - 1).uniform()


def test_format_float() -> None:
    assert "0.1" == format_float(0.1)
    assert "3.0" == format_float(3)
    assert "nan" == format_float(float("nan"))
