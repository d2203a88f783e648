from densfield.tensor.tensor import Tensor, as_tensor
from densfield.tensor.graph import Graph, backward
from densfield.tensor.ops import apply_primitive, PRIMITIVES
from densfield.tensor.params import ParamSet
from densfield.tensor.optim import AdamState, adam_step
from densfield.tensor.gradcheck import finite_diff_grad, relative_error
