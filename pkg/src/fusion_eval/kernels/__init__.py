from .assignment import AssignmentError, assign, assignment_cost
from .boxes import (BCE_EPS, HeadLoss, bce, cxcywh_to_xyxy, detection_head_loss, giou, giou_loss,
                    l1_box, matching_cost)
from .ctc import CTCInfeasibleError, ctc_forward_backward, ctc_greedy_decode, ctc_loss, min_frames
from .imaging import ShapeError, bilinear_resize, patchify, smart_resize, unpatchify

__all__ = [
    "AssignmentError", "assign", "assignment_cost",
    "BCE_EPS", "HeadLoss", "bce", "cxcywh_to_xyxy", "detection_head_loss", "giou", "giou_loss",
    "l1_box", "matching_cost",
    "CTCInfeasibleError", "ctc_forward_backward", "ctc_greedy_decode", "ctc_loss", "min_frames",
    "ShapeError", "bilinear_resize", "patchify", "smart_resize", "unpatchify",
]
