"""Analytic gradients against central finite differences on a tiny model."""

import torch

from aigem.graph import build_hetero_graph
from aigem.model.network import AigemModel, ModelConfig
from tests.conftest import identity_scaler, make_window

EPS = 1e-5
REL_TOL = 1e-4
# below this absolute difference the comparison sits in finite-difference
# roundoff (loss is O(1), so central differences carry ~1e-10 of noise)
ABS_FLOOR = 1e-9


def tiny_batch():
    """Two-actor scene, three history steps, two future steps."""
    window = make_window(
        ego_id=0,
        positions=[
            {0: (0.0, 0.0), 1: (8.0, 1.0), 2: (-6.0, -2.0)},
            {0: (1.0, 0.1), 1: (9.0, 1.2), 2: (-5.0, -1.8)},
            {0: (2.0, 0.2), 1: (10.0, 1.4), 2: (-4.0, -1.6)},
        ],
        k_f=2,
        thetas={0: 0.05, 1: 0.1, 2: -0.2},
        vs={0: 5.0, 1: 5.2, 2: 4.8},
    )
    graph = build_hetero_graph(window, identity_scaler())
    targets = {
        1: [(11.0, 1.6), (12.0, 1.8)],
        2: [(-3.0, -1.4), (-2.0, -1.2)],
    }
    return [(graph, targets)]


def tiny_model() -> AigemModel:
    torch.manual_seed(3)
    config = ModelConfig(
        hidden_dim=8, encoder_layers=2, k_f=2, dropout=0.0, mlp_hidden=(8, 4)
    )
    return AigemModel(config)


def finite_difference_report(model: AigemModel, batch, eps: float = EPS):
    """Max relative error between analytic and numeric gradients, checked
    coordinate by coordinate over every parameter tensor."""
    _, grads = model.loss_and_gradients(batch)
    worst = 0.0
    worst_name = ""
    checked = 0
    for name, param in model.named_parameters():
        flat = param.data.view(-1)
        grad = grads[name].view(-1)
        for i in range(flat.numel()):
            orig = float(flat[i])
            with torch.no_grad():
                flat[i] = orig + eps
            up = float(model.batch_loss(batch).detach())
            with torch.no_grad():
                flat[i] = orig - eps
            down = float(model.batch_loss(batch).detach())
            with torch.no_grad():
                flat[i] = orig
            numeric = (up - down) / (2 * eps)
            analytic = float(grad[i])
            diff = abs(numeric - analytic)
            if diff <= ABS_FLOOR:
                err = 0.0
            else:
                err = diff / max(abs(numeric), abs(analytic))
            checked += 1
            if err > worst:
                worst, worst_name = err, f"{name}[{i}]"
    return worst, worst_name, checked


def test_gradients_match_finite_differences():
    model = tiny_model()
    batch = tiny_batch()
    worst, worst_name, checked = finite_difference_report(model, batch)
    assert checked == model.param_count()
    assert worst <= REL_TOL, f"worst {worst:.2e} at {worst_name}"


def test_gradient_check_covers_all_components():
    model = tiny_model()
    _, grads = model.loss_and_gradients(tiny_batch())
    prefixes = {name.split(".")[0] for name in grads}
    assert {"encoder_layers", "gru", "mlp"} <= prefixes
    # interaction edges exist, so attention parameters receive signal
    att_grads = [g for n, g in grads.items() if n.endswith("att")]
    assert att_grads and any(float(g.abs().sum()) > 0 for g in att_grads)
