from importlib.metadata import metadata

import bivext


def test_metadata() -> None:
    data = metadata("bivariate-extremes")
    assert data["Author"] == bivext.__author__
    assert data["Version"] == bivext.__version__


def test_exports() -> None:
    assert len(set(bivext.__all__)) == len(bivext.__all__)
    for name in bivext.__all__:
        assert hasattr(bivext, name), name
