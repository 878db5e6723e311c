"""Regenerates the bundled test images.

flat_128.png   constant color
step_128.png   vertical step edge at column 64
photo_128.png  detail-rich photograph (NASA astronaut portrait, public domain)
photo_512.png  same photograph at 512x512 for tiling runs
"""
import numpy as np
from PIL import Image
from skimage import data

here = __import__("pathlib").Path(__file__).parent

flat = np.zeros((128, 128, 3), np.uint8)
flat[:] = (204, 102, 51)
Image.fromarray(flat).save(here / "flat_128.png")

step = np.zeros((128, 128, 3), np.uint8)
step[:, :64] = (30, 40, 60)
step[:, 64:] = (220, 200, 180)
Image.fromarray(step).save(here / "step_128.png")

photo = Image.fromarray(data.astronaut())
photo.save(here / "photo_512.png")
photo.resize((128, 128), Image.BOX).save(here / "photo_128.png")
