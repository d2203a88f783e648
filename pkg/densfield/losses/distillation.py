"""Distillation of the multi view density in to the single view head"""
from densfield.core.exceptions import DensFieldContractViolation
from densfield.tensor import Tensor, as_tensor
from densfield.tensor import ops


def kd_loss(teacher_sigmas, student_sigmas) -> Tensor:
    """Mean absolute difference, no gradient reaches the teacher

    >>> kd_loss([5.0], [2.0]).item()
    3.0
    """
    teacher_sigmas, student_sigmas = as_tensor(teacher_sigmas), as_tensor(student_sigmas)
    if teacher_sigmas.shape != student_sigmas.shape:
        raise DensFieldContractViolation("kd_loss got {} teacher and {} student densities".format(
            teacher_sigmas.shape, student_sigmas.shape))
    if not teacher_sigmas.size:
        raise DensFieldContractViolation("kd_loss needs at least one point")
    return ops.reduce_mean(ops.absolute(ops.stop_gradient(teacher_sigmas) - student_sigmas))
