"""
有界複体・ホモトピー圏・Verdier商のテストコード
"""

from pathlib import Path

import pytest

from src.algmod import ModuleHom, zero_module
from src.errors import DimensionMismatchError
from src.file_reader import RegistryReader
from src.komplex import (
    BoundedComplex, ChainMap, brutal_truncate, cone, homotopy_hom, phi_tor_check,
    phi_vanishing_check, stable_complex_check, stalk, suspend, truncated_resolution, verdier_hom,
)


FIXTURES = Path(__file__).parent.parent / 'fixtures'


def load_registry(name, p=None):
    return RegistryReader().read_file(FIXTURES / f'{name}.json', p=p)


class TestBoundedComplex:
    """BoundedComplexと基本操作のテスト"""

    def setup_method(self):
        self.registry = load_registry('k_t2')
        self.x = self.registry.x_subcategory()
        self.k = self.registry.get('k')

    def test_stalk(self):
        c = stalk(self.k, 2)
        assert c.support() == [2]
        assert c.term(0).dim == 0
        assert c.d_squared_violations() == []

    def test_stalk_of_zero_module(self):
        assert stalk(zero_module(self.k.algebra)).is_zero()

    def test_suspend(self):
        assert suspend(stalk(self.k, 0), 1).support() == [-1]
        assert suspend(stalk(self.k, 0), -2).support() == [2]

    def test_suspend_changes_differential_sign(self):
        c = truncated_resolution(self.k, self.x, 2)
        shifted = suspend(c, 1)
        original = c.differential(-1).matrix
        assert (shifted.differential(-2).matrix % 101).tolist() == ((-original) % 101).tolist()
        assert suspend(c, 2).differential(-3).matrix.tolist() == original.tolist()
        assert shifted.d_squared_violations() == []

    def test_truncated_resolution(self):
        c = truncated_resolution(self.k, self.x, 3)
        assert c.support() == [-3, -2, -1, 0]
        assert c.d_squared_violations() == []

    def test_brutal_truncate(self):
        c = truncated_resolution(self.k, self.x, 3)
        assert brutal_truncate(c, lower=-1).support() == [-1, 0]
        assert brutal_truncate(c, upper=-2).support() == [-3, -2]
        assert brutal_truncate(c, lower=1).is_zero()

    def test_zero_complex(self):
        assert BoundedComplex.zero(self.k.algebra).is_zero()


class TestHomotopyHom:
    """homotopy_homと写像錐のテスト"""

    def setup_method(self):
        self.registry = load_registry('k_t2')
        self.x = self.registry.x_subcategory()
        self.k = self.registry.get('k')

    def test_stalk_endomorphisms(self):
        c = stalk(self.k, 0)
        result = homotopy_hom(c, c, representatives=True)
        assert result.dim == 1
        assert len(result.representatives) == 1

    def test_different_degrees(self):
        assert homotopy_hom(stalk(self.k, 0), stalk(self.k, 1)).dim == 0

    def test_zero_source(self):
        zero = BoundedComplex.zero(self.k.algebra)
        assert homotopy_hom(zero, stalk(self.k)).dim == 0

    def test_cone_of_identity_is_contractible(self):
        c = stalk(self.k, 0)
        identity = ChainMap(c, c, {0: ModuleHom.identity(self.k)})
        assert identity.commutation_violations() == []
        result = cone(identity)
        assert result.complex.d_squared_violations() == []
        assert result.inclusion.commutation_violations() == []
        assert result.projection.commutation_violations() == []
        assert homotopy_hom(result.complex, result.complex).dim == 0

    def test_resolution_of_x_object_is_contractible(self):
        lam = self.registry.get('Lambda')
        c = truncated_resolution(lam, self.x, 2)
        assert homotopy_hom(c, c).dim == 0
        assert homotopy_hom(stalk(lam), stalk(lam)).dim == 2


class TestVerdierHom:
    """verdier_homのテスト"""

    def setup_method(self):
        self.registry = load_registry('k_t2')
        self.x = self.registry.x_subcategory()
        self.k = self.registry.get('k')

    @pytest.mark.parametrize("n, expected", [(-1, 0), (0, 1), (1, 1), (2, 1)])
    def test_dual_numbers(self, n, expected):
        result = verdier_hom(self.k, self.k, n, self.x)
        assert result.dim == expected
        first, second = result.truncation_lengths
        assert second == first + 1
        assert result.to_dict()["dim"] == expected

    def test_x_object_vanishes(self):
        lam = self.registry.get('Lambda')
        assert verdier_hom(lam, self.k, 0, self.x).dim == 0
        assert verdier_hom(self.k, lam, 1, self.x).dim == 0

    def test_path_algebra(self):
        registry = load_registry('a2')
        x = registry.x_subcategory()
        s1 = registry.get('S1')
        assert verdier_hom(s1, s1, 0, x).dim == 1
        assert verdier_hom(s1, s1, 1, x).dim == 0


class TestStableComplex:
    """stable_complex_checkのテスト"""

    def setup_method(self):
        self.registry = load_registry('k_t3')
        self.x = self.registry.x_subcategory()
        self.m = self.registry.get('M')
        self.k = self.registry.get('k')

    def test_passes(self):
        report = stable_complex_check(self.m, self.k, [[1, 0]], [[0], [1]], self.x)
        assert report.passed
        assert report.pi_iota_honest_zero
        assert report.pi_class_dim == 1
        data = report.to_dict()
        assert data["passed"] is True
        assert data["iota∘pi"]["factorization"]["through"]

    def test_zero_maps_fail(self):
        report = stable_complex_check(self.m, self.k, [[0, 0]], [[0], [0]], self.x)
        assert not report.passed
        assert not report.pi_nonzero

    def test_not_a_homomorphism(self):
        with pytest.raises(DimensionMismatchError):
            stable_complex_check(self.m, self.k, [[0, 1]], [[0], [1]], self.x)


class TestPhiChecks:
    """有限集合上の消滅判定のテスト"""

    def test_dual_numbers_has_witness(self):
        registry = load_registry('k_t2')
        x = registry.x_subcategory()
        objects = list(registry.modules.values())
        verdict = phi_vanishing_check(objects, x, 3)
        assert not verdict.no_obstruction
        assert verdict.witness == ('k', 'k', 1, 1)
        tor_verdict = phi_tor_check(objects, x, 3)
        assert tor_verdict.witness == ('k', 'k', 1, 1)

    def test_path_algebra_has_no_obstruction(self):
        registry = load_registry('a2')
        x = registry.x_subcategory()
        objects = list(registry.modules.values())
        verdict = phi_vanishing_check(objects, x, 3)
        assert verdict.no_obstruction
        assert verdict.witness is None
        assert verdict.checked == 27
        assert phi_tor_check(objects, x, 3).no_obstruction
        assert verdict.to_dict()["witness"] is None

    def test_invalid_range(self):
        registry = load_registry('a2')
        x = registry.x_subcategory()
        with pytest.raises(ValueError):
            phi_vanishing_check(list(registry.modules.values()), x, 0)
        with pytest.raises(ValueError):
            phi_tor_check(list(registry.modules.values()), x, 0)
