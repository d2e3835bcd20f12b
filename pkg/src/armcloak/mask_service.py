"""Robot-cancellation mask generation.

A monochromatic (white) copy of the arm is rendered against a black panel
from the virtual camera, then the per-pixel inclusive RGBA range test turns
that frame into the binary cancellation mask.
"""

from __future__ import annotations

from .camera import CameraModel
from .frames import BinaryMask, ChannelRanges, FrameRGBA, binarize_mask
from .kinematics import KinematicChain, world_primitives
from .render import SceneItem, render_items

WHITE = (255, 255, 255, 255)
BLACK = (0, 0, 0, 255)


def render_silhouette(chain: KinematicChain, q, cam: CameraModel) -> FrameRGBA:
    """White-on-black render of the arm's collision primitives.

    A pixel is white exactly when its center ray meets a link primitive
    between the near and far planes; no anti-aliasing.
    """
    items = [SceneItem(p, WHITE) for p in world_primitives(chain, q)]
    return render_items(items, cam)


def service_mask(chain: KinematicChain, q, cam: CameraModel, ranges: ChannelRanges) -> BinaryMask:
    """Cancellation mask: silhouette render followed by the range predicate."""
    return binarize_mask(render_silhouette(chain, q, cam), ranges)
