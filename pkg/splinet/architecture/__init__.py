from splinet.architecture.bspline import SplineBasis, evaluate_table, layer_table, sample_basis
from splinet.architecture.control import ControlParams, TimeGrid, init_random, layer_controls, materialize, param_count
from splinet.architecture.dynamics import Activation, Trajectory, map_inputs, propagate
from splinet.architecture.adjoint import Gradients, accumulate_gradients, gradient_check, loss_and_gradients
