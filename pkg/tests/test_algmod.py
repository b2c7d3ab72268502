"""
代数と加群のテストコード
"""

from pathlib import Path

import numpy as np
import pytest

from src.algmod import (
    AlgebraPresentation, FdModule, ModuleHom, XSubcategory, clear_hom_cache, cokernel, direct_sum,
    hom_cache_size, hom_dim, hom_space, kernel, zero_module,
)
from src.errors import DimensionMismatchError, UnknownObjectError
from src.exactla import FieldSpec
from src.file_reader import RegistryReader


FIXTURES = Path(__file__).parent.parent / 'fixtures'


def load_registry(name, p=None):
    return RegistryReader().read_file(FIXTURES / f'{name}.json', p=p)


def broken_algebra():
    """(x*y)*y != x*(y*y) となる3次元代数"""
    f = FieldSpec(7)
    mult = np.zeros((3, 3, 3), dtype=np.int64)
    for j in range(3):
        mult[0, j, j] = 1
        mult[j, 0, j] = 1
    mult[1, 2, 1] = 1  # x*y = x
    return AlgebraPresentation(f, ('1', 'x', 'y'), mult, np.array([1, 0, 0]))


class TestAlgebraPresentation:
    """AlgebraPresentationクラスのテスト"""

    @pytest.mark.parametrize("name", ["k_t2", "k_t3", "a2", "a3"])
    def test_bundled_algebras_are_associative_and_unital(self, name):
        algebra = load_registry(name).algebra
        assert algebra.associativity_violations() == []
        assert algebra.unit_violations() == []

    def test_associativity_violation_reported(self):
        algebra = broken_algebra()
        assert (1, 2, 2) in algebra.associativity_violations()

    def test_unit_violation_reported(self):
        algebra = broken_algebra()
        bad = AlgebraPresentation(algebra.field, algebra.basis_names, algebra.mult, np.array([0, 1, 0]))
        assert bad.unit_violations()

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            AlgebraPresentation(FieldSpec(5), ('1',), np.zeros((2, 2, 2), dtype=np.int64), np.array([1]))

    def test_index_unknown(self):
        algebra = load_registry('k_t2').algebra
        assert algebra.index('t') == 1
        with pytest.raises(UnknownObjectError):
            algebra.index('s')

    def test_opposite_and_regular_module(self):
        algebra = load_registry('a2').algebra
        opposite = algebra.opposite()
        assert opposite.associativity_violations() == []
        assert algebra.regular_module().axiom_violations() == []
        assert opposite.regular_module().axiom_violations() == []
        assert algebra.regular_module().dim == 3


class TestFdModule:
    """FdModuleクラスのテスト"""

    def setup_method(self):
        self.registry = load_registry('k_t3')
        self.algebra = self.registry.algebra

    def test_registered_modules_satisfy_axioms(self):
        for module in self.registry.modules.values():
            assert module.axiom_violations() == []

    def test_wrong_action_count(self):
        with pytest.raises(DimensionMismatchError):
            FdModule('bad', self.algebra, (np.eye(1, dtype=np.int64),))

    def test_non_square_action(self):
        with pytest.raises(DimensionMismatchError):
            FdModule('bad', self.algebra, tuple(np.zeros((1, 2), dtype=np.int64) for _ in range(3)))

    def test_axiom_violation(self):
        # t が冪零でない
        action = (np.eye(1, dtype=np.int64), np.eye(1, dtype=np.int64), np.zeros((1, 1), dtype=np.int64))
        module = FdModule('bad', self.algebra, action)
        assert (1, 1) in module.axiom_violations()

    def test_acting(self):
        m = self.registry.get('M')
        assert m.acting('t').tolist() == [[0, 0], [1, 0]]

    def test_zero_module(self):
        zero = zero_module(self.algebra)
        assert zero.is_zero()
        assert zero.axiom_violations() == []


class TestHomSpaces:
    """Hom空間のテスト"""

    def test_dual_numbers(self):
        registry = load_registry('k_t2')
        lam, k = registry.get('Lambda'), registry.get('k')
        assert hom_dim(k, k) == 1
        assert hom_dim(lam, k) == 1
        assert hom_dim(k, lam) == 1
        assert hom_dim(lam, lam) == 2

    def test_path_algebra(self):
        registry = load_registry('a2')
        s1, s2, p1 = registry.get('S1'), registry.get('S2'), registry.get('P1')
        assert hom_dim(s2, p1) == 1
        assert hom_dim(p1, s2) == 0
        assert hom_dim(p1, s1) == 1
        assert hom_dim(s1, p1) == 0

    def test_basis_elements_are_homomorphisms(self):
        registry = load_registry('a3')
        p1, m12 = registry.get('P1'), registry.get('M12')
        homs = hom_space(p1, m12)
        assert len(homs) == 1
        assert all(h.intertwining_violations() == [] for h in homs)

    def test_direct_sum_decomposition(self):
        registry = load_registry('k_t2')
        lam, k = registry.get('Lambda'), registry.get('k')
        ds = direct_sum([lam, k])
        assert ds.module.dim == 3
        assert hom_dim(ds.module, k) == 2
        assert hom_dim(k, ds.module) == 2
        for inj, proj in zip(ds.injections, ds.projections):
            assert proj.compose(inj).matrix.tolist() == np.eye(inj.source.dim, dtype=np.int64).tolist()

    def test_empty_direct_sum_needs_algebra(self):
        with pytest.raises(ValueError):
            direct_sum([])


class TestKernelCokernel:
    """核と余核のテスト"""

    def setup_method(self):
        self.registry = load_registry('a2')
        self.s1 = self.registry.get('S1')
        self.s2 = self.registry.get('S2')
        self.p1 = self.registry.get('P1')

    def test_kernel_of_top_projection(self):
        (h,) = hom_space(self.p1, self.s1)
        module, inclusion = kernel(h)
        assert module.dim == 1
        assert module.axiom_violations() == []
        assert hom_dim(module, self.s2) == 1
        assert h.compose(inclusion).is_zero()

    def test_cokernel_of_socle_inclusion(self):
        (h,) = hom_space(self.s2, self.p1)
        module, projection = cokernel(h)
        assert module.dim == 1
        assert module.acting('e1').tolist() == [[1]]
        assert projection.compose(h).is_zero()

    def test_kernel_of_zero_map(self):
        module, inclusion = kernel(ModuleHom.zero(self.p1, self.s1))
        assert module.dim == 2
        assert inclusion.intertwining_violations() == []

    def test_hom_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            ModuleHom(self.s1, self.p1, np.zeros((1, 1), dtype=np.int64))


class TestRegistryAndSubcategory:
    """ObjectRegistryとXSubcategoryのテスト"""

    def setup_method(self):
        self.registry = load_registry('a2')

    def test_default_x(self):
        x = self.registry.x_subcategory()
        assert x.names == ('P1', 'S2')
        assert x.contains(self.registry.get('P1'))
        assert not x.contains(self.registry.get('S1'))

    def test_named_subcategory(self):
        x = self.registry.x_subcategory('injectives')
        assert x.names == ('P1', 'S1')
        assert x.label == 'injectives'

    def test_comma_separated_names(self):
        x = self.registry.x_subcategory('S1, S2', mode='universal')
        assert x.names == ('S1', 'S2')
        assert x.mode == 'universal'

    def test_unknown_object(self):
        with pytest.raises(UnknownObjectError) as exc_info:
            self.registry.get('S9')
        assert 'S9' in str(exc_info.value)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            XSubcategory([self.registry.get('P1')], mode='minimal')

    def test_memo_keeps_first_value(self):
        x = self.registry.x_subcategory()
        assert x.memo('key', lambda: 1) == 1
        assert x.memo('key', lambda: 2) == 1

    def test_clear_cache(self):
        x = self.registry.x_subcategory()
        x.memo('key', lambda: 1)
        assert x.cache_size == 1
        x.clear_cache()
        assert x.cache_size == 0
        assert x.memo('key', lambda: 2) == 2

    def test_clear_hom_cache(self):
        hom_dim(self.registry.get('P1'), self.registry.get('S1'))
        assert hom_cache_size() > 0
        clear_hom_cache()
        assert hom_cache_size() == 0
        assert hom_dim(self.registry.get('P1'), self.registry.get('S1')) == 1

    def test_unresolved_members(self):
        self.registry.subcategories['broken'] = ('Q',)
        assert ('broken', 'Q') in self.registry.unresolved_members()
