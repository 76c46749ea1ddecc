"""Binary mask <-> PNG conversion.

Masks are written as 8-bit grayscale PNGs with pixel values {0, 255} and
read back with a >= 128 threshold, so write/read round-trips are exact at
the bit level.  Color input is rejected rather than silently collapsed to
one channel.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image, UnidentifiedImageError

from .raster import BinaryMask


class MaskFormatError(ValueError):
    """The byte payload is not a mask PNG this toolkit accepts."""


def write_mask_png(mask: BinaryMask) -> bytes:
    """Encode a mask as an 8-bit grayscale PNG (stem = 255, background = 0)."""
    arr = np.where(mask.pixels, 255, 0).astype(np.uint8)
    img = Image.fromarray(arr, mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def read_mask_png(data: bytes) -> BinaryMask:
    """Decode a PNG into a mask, thresholding 8-bit gray values at >= 128.

    Accepts 8-bit grayscale ("L"), bilevel ("1") and paletted ("P", assumed
    binary) PNGs.  RGB/RGBA and other modes raise MaskFormatError with an
    instruction to convert first.
    """
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except UnidentifiedImageError as exc:
        raise MaskFormatError("payload is not a PNG image") from exc
    except OSError as exc:
        raise MaskFormatError(f"payload is not a readable PNG image: {exc}") from exc
    if img.format != "PNG":
        raise MaskFormatError(f"expected a PNG, got {img.format}")

    if img.mode == "1":
        arr = np.asarray(img, dtype=np.bool_)
    elif img.mode == "L":
        arr = np.asarray(img) >= 128
    elif img.mode == "P":
        arr = np.asarray(img.convert("L")) >= 128
    elif img.mode in ("RGB", "RGBA"):
        raise MaskFormatError(
            "RGB masks are ambiguous; convert to 8-bit grayscale (values 0/255) before loading"
        )
    else:
        raise MaskFormatError(
            f"unsupported PNG mode {img.mode!r}; convert to 8-bit grayscale before loading"
        )
    return BinaryMask(arr)
