"""
X加群・テンソル積・標準写像・Torのテストコード
"""

from pathlib import Path

import pytest

from src.catmod import (
    LEFT, RIGHT, XCategory, canonical_map, cat_projective_resolution, category_of,
    representable_sum, restriction_module, tensor_over_x, tor,
)
from src.errors import DegreeRangeError
from src.file_reader import RegistryReader


FIXTURES = Path(__file__).parent.parent / 'fixtures'


def load_registry(name, p=None):
    return RegistryReader().read_file(FIXTURES / f'{name}.json', p=p)


class TestXCategory:
    """XCategoryクラスのテスト"""

    def setup_method(self):
        self.registry = load_registry('a2')
        self.x = self.registry.x_subcategory()
        self.cat = XCategory.from_subcategory(self.x)

    def test_hom_dims(self):
        assert self.cat.size == 2
        assert self.cat.hom_dims == {(0, 0): 1, (0, 1): 0, (1, 0): 1, (1, 1): 1}

    def test_morphisms_are_enumerated(self):
        assert list(self.cat.morphisms()) == [(0, 0, 0), (1, 0, 0), (1, 1, 0)]

    def test_opposite(self):
        opposite = self.cat.opposite()
        assert opposite.hom_dims[(0, 1)] == 1
        assert opposite.hom_dims[(1, 0)] == 0

    def test_category_is_cached(self):
        assert category_of(self.x) is category_of(self.x)

    def test_representable_module(self):
        module = representable_sum(self.cat, [0], "X(-,P1)")
        assert module.dims == (1, 1)
        assert module.functoriality_violations() == []


class TestRestrictionModules:
    """制限加群のテスト"""

    def setup_method(self):
        self.registry = load_registry('a2')
        self.x = self.registry.x_subcategory()

    def test_right_restriction(self):
        module = restriction_module(self.registry.get('S1'), RIGHT, self.x)
        assert module.dims == (1, 0)
        assert module.side == RIGHT
        assert module.functoriality_violations() == []

    def test_left_restriction(self):
        module = restriction_module(self.registry.get('S1'), LEFT, self.x)
        assert module.is_zero()
        p1 = restriction_module(self.registry.get('P1'), LEFT, self.x)
        assert p1.dims == (1, 0)
        assert p1.functoriality_violations() == []

    def test_invalid_side(self):
        with pytest.raises(ValueError):
            restriction_module(self.registry.get('S1'), 'up', self.x)

    def test_opposite_round_trip(self):
        module = restriction_module(self.registry.get('P1'), RIGHT, self.x)
        opposite = module.as_opposite()
        assert opposite.side == LEFT
        assert opposite.functoriality_violations() == []
        back = opposite.as_opposite()
        assert back.side == RIGHT
        assert back.dims == module.dims


class TestTensorAndCanonicalMap:
    """テンソル積と標準写像のテスト"""

    def test_dual_numbers(self):
        registry = load_registry('k_t2')
        x = registry.x_subcategory()
        k = registry.get('k')
        value = tensor_over_x(restriction_module(k, RIGHT, x), restriction_module(k, LEFT, x))
        assert value.dim == 1
        assert len(value.generators) == 1

    def test_pair_order(self):
        registry = load_registry('k_t2')
        x = registry.x_subcategory()
        k = registry.get('k')
        with pytest.raises(ValueError):
            tensor_over_x(restriction_module(k, LEFT, x), restriction_module(k, RIGHT, x))

    def test_canonical_map_dual_numbers(self):
        registry = load_registry('k_t2')
        x = registry.x_subcategory()
        k, lam = registry.get('k'), registry.get('Lambda')
        result = canonical_map(k, k, x)
        assert result.kernel_dim == 1
        assert result.cokernel_dim == 1
        assert result.consistent
        through_x = canonical_map(lam, k, x)
        assert through_x.kernel_dim == 0
        assert through_x.cokernel_dim == 0

    def test_canonical_map_path_algebra(self):
        registry = load_registry('a2')
        x = registry.x_subcategory()
        s1 = registry.get('S1')
        result = canonical_map(s1, s1, x)
        assert result.tensor_dim == 0
        assert result.hom_dim == 1
        assert result.cokernel_dim == 1
        assert result.consistent

    @pytest.mark.parametrize("name", ["k_t3", "a3"])
    def test_cokernel_is_stable_hom(self, name):
        registry = load_registry(name)
        x = registry.x_subcategory()
        for a in registry.modules.values():
            for b in registry.modules.values():
                assert canonical_map(a, b, x).consistent


class TestProjectiveResolution:
    """表現可能加群による射影分解のテスト"""

    def setup_method(self):
        self.registry = load_registry('k_t2')
        self.x = self.registry.x_subcategory()
        self.module = restriction_module(self.registry.get('k'), RIGHT, self.x)

    def test_exact(self):
        res = cat_projective_resolution(self.module, 4)
        assert res.length == 4
        assert res.exactness_defects() == []
        assert all(term.functoriality_violations() == [] for term in res.terms)

    def test_universal_cover(self):
        res = cat_projective_resolution(self.module, 2, mode='universal')
        assert res.exactness_defects() == []

    def test_invalid_arguments(self):
        with pytest.raises(DegreeRangeError):
            cat_projective_resolution(self.module, 0)
        with pytest.raises(ValueError):
            cat_projective_resolution(self.module.as_opposite(), 2)


class TestTor:
    """Torのテスト"""

    def setup_method(self):
        self.registry = load_registry('k_t2')
        self.x = self.registry.x_subcategory()
        k = self.registry.get('k')
        self.m = restriction_module(k, RIGHT, self.x)
        self.n = restriction_module(k, LEFT, self.x)

    def test_degree_zero_is_tensor(self):
        assert tor(self.m, self.n, 0) == 1

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_both_sides_agree(self, n):
        assert tor(self.m, self.n, n, resolve=RIGHT) == 1
        assert tor(self.m, self.n, n, resolve=LEFT) == 1

    def test_negative_degree(self):
        with pytest.raises(DegreeRangeError):
            tor(self.m, self.n, -1)

    def test_without_stability_check(self):
        assert tor(self.m, self.n, 2, stability_check=False) == 1

    def test_hereditary_algebra_vanishes(self):
        registry = load_registry('a3')
        x = registry.x_subcategory()
        for a in registry.modules.values():
            for b in registry.modules.values():
                m = restriction_module(b, RIGHT, x)
                n = restriction_module(a, LEFT, x)
                assert tor(m, n, 1, stability_check=False) == 0
