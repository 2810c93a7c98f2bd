import pytest

from butterflynet import kernels


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    previous = kernels.active_backend()
    kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(previous)
