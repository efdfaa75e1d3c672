from lewisim.autodiff.tensor import Tensor, Tape, Function, no_grad, parameter
from lewisim.autodiff.optim import Adam, AdamState, adam_step
from lewisim.autodiff.gradcheck import grad_check, GradCheckReport

__all__ = [
	"Tensor",
	"Tape",
	"Function",
	"no_grad",
	"parameter",
	"Adam",
	"AdamState",
	"adam_step",
	"grad_check",
	"GradCheckReport",
]
