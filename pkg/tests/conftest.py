from __future__ import annotations

import pytest

from pinchsop import SystemGeometry


@pytest.fixture
def geom_iv():
    """Default evaluation scenario: D = 20 m, h = 5 m, delta = 1 m, gamma_bar = 15 dB."""
    return SystemGeometry(20.0, 5.0, 1.0, 10 ** 1.5)
