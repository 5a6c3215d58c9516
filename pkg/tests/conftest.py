import numpy as np
import pytest

from core.elastowave.mesh.mesh import MaterialRegion, build_mesh
from core.elastowave.physics.physics import MaterialModel
from core.elastowave.solver.solver import build_discretization, create_state

KM = 1e3

TINY_CONFIG = """\
# 2D strip at desk scale
[run]
dimension = 2
degree = 2
t_end = 1.5 s
kind = tiny

[domain]
lower = -30 km, 0 km
upper = 30 km, 20 km
elements = 6, 2

[material.rock]
rho = 2.7 g/cm3
cp = 6 km/s
cs = 3.464 km/s

[boundary]
y_lower = 1

[pml.x]
width = 10 km
tol = 1e-6
alpha = 0.15

[initial]
kind = gaussian
center = 0 km, 10 km
width = 3 km
components = vx, vy

[receiver.r1]
location = 5 km, 20 km

[output]
energy_interval = 0.5 s
linf_interval = 0.5 s
"""


@pytest.fixture
def rock():
    return MaterialModel.from_speeds(2700.0, 6000.0, 3464.0, name="rock")


@pytest.fixture
def unit_material():
    return MaterialModel.from_lame(1.0, 1.0, 1.0, name="unit")


@pytest.fixture
def make_mesh(unit_material):
    def _make(counts=(4, 3), lower=None, upper=None, boundary=None, material=None):
        lower = [0.0] * len(counts) if lower is None else lower
        upper = [float(k) for k in counts] if upper is None else upper
        region = MaterialRegion(material or unit_material)
        return build_mesh(lower, upper, counts, [region], boundary)
    return _make


@pytest.fixture
def make_state(make_mesh):
    def _make(counts=(4, 3), degree=3, boundary=None, pml=None, seed=None, **kwargs):
        mesh = make_mesh(counts, boundary=boundary, **kwargs)
        disc = build_discretization(mesh, degree, pml)
        Q = None
        if seed is not None:
            Q = np.random.default_rng(seed).standard_normal(disc.field_shape)
        return create_state(disc, Q)
    return _make


@pytest.fixture
def tiny_config_file(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY_CONFIG, encoding="utf-8")
    return path
