import numpy as np
import pytest
import zarr
from SteinFlow.grid.grids import Grid1D
from SteinFlow.spectral import cache
from SteinFlow.spectral.cache import (
    CACHE_FORMAT_VERSION,
    basis_fingerprint,
    cached_basis,
    load_basis,
    save_basis,
)


@pytest.fixture
def grid():
    return Grid1D(-8.0, 8.0, 65)


class TestFingerprint:
    def test_stable(self, mixture3, grid):
        assert basis_fingerprint(mixture3, grid, 10) == basis_fingerprint(
            mixture3, Grid1D(-8, 8, 65), 10
        )

    @pytest.mark.parametrize(
        "change", [{"k": 11}, {"k": None}, {"grid": Grid1D(-8.0, 8.0, 66)}]
    )
    def test_changes(self, mixture3, grid, change):
        base = basis_fingerprint(mixture3, grid, 10)
        args = {"grid": grid, "k": 10, **change}
        assert basis_fingerprint(mixture3, args["grid"], args["k"]) != base

    def test_target(self, mixture3, gaussian, grid):
        assert basis_fingerprint(mixture3, grid, 5) != basis_fingerprint(
            gaussian, grid, 5
        )


class TestCache:
    def test_build_then_load(self, mixture3, grid, tmp_path, monkeypatch):
        first = cached_basis(mixture3, grid, 10, tmp_path)
        path = tmp_path / f"{basis_fingerprint(mixture3, grid, 10)}.zarr"
        assert path.is_dir()
        root = zarr.open_group(str(path), mode="r")
        assert root.attrs["format_version"] == CACHE_FORMAT_VERSION
        assert root.attrs["k"] == first.k
        assert root["eigenfunctions"].shape == (first.k, grid.n)

        def fail(*args, **kwargs):
            raise AssertionError("basis rebuilt")

        monkeypatch.setattr(cache, "build_basis", fail)
        second = cached_basis(mixture3, grid, 10, tmp_path)
        np.testing.assert_array_equal(second.eigenvalues, first.eigenvalues)
        np.testing.assert_array_equal(
            second.eigenfunction_values, first.eigenfunction_values
        )
        np.testing.assert_array_equal(second.gradient_values, first.gradient_values)
        assert second.grid == grid

    def test_without_cache(self, gaussian, grid):
        assert cached_basis(gaussian, grid, 4, None).k == 4

    def test_stale(self, gaussian, grid, tmp_path):
        basis = cached_basis(gaussian, grid, 4, None)
        path = save_basis(basis, tmp_path / "basis.zarr", "other-id")
        assert load_basis(path, "expected-id") is None
        assert load_basis(tmp_path / "missing.zarr", "expected-id") is None
        assert load_basis(path, "other-id").k == 4

    def test_corrupt_rebuilt(self, gaussian, grid, tmp_path):
        basis_id = basis_fingerprint(gaussian, grid, 4)
        path = tmp_path / f"{basis_id}.zarr"
        group = zarr.open_group(str(path), mode="w")
        group.attrs.update(
            {"fingerprint": basis_id, "format_version": CACHE_FORMAT_VERSION}
        )
        basis = cached_basis(gaussian, grid, 4, tmp_path)
        assert basis.k == 4
        assert load_basis(path, basis_id).k == 4
