# processors模块初始化
from .tensor_core import BiasVector, ConvKernel, DataTensor, KernelBuilder, conv2d
from .cnn_builder import ConvLayer, ConvNet, HypothesisFunction, forward, evaluate, size_of
from .scalar_networks import build_prd_net, build_sq_net
from .shift_ops import build_selector, selector_net
from .product_network import build_product_net
from .sparse_grid import LevelIndex, SparseExpansion, enumerate_indices
from .basis_network import build_basis_net, build_phi_net
from .approximator import KorobovApproximator, build_approximator, check_size_bound, select_N
from .verification import VerificationSuite

__all__ = [
    'BiasVector',
    'ConvKernel',
    'DataTensor',
    'KernelBuilder',
    'conv2d',
    'ConvLayer',
    'ConvNet',
    'HypothesisFunction',
    'forward',
    'evaluate',
    'size_of',
    'build_prd_net',
    'build_sq_net',
    'build_selector',
    'selector_net',
    'build_product_net',
    'LevelIndex',
    'SparseExpansion',
    'enumerate_indices',
    'build_basis_net',
    'build_phi_net',
    'KorobovApproximator',
    'build_approximator',
    'check_size_bound',
    'select_N',
    'VerificationSuite',
]
