"""Brute-force oracles shared by unit and acceptance tests.

These stay deliberately naive (queues, double loops) and independent of the
library code paths they check.
"""

from collections import deque

import numpy as np


def flood_fill_components(mask):
    """8-connected components by BFS flood fill.

    Returns a list of (frozenset of (x, y) pixels, (x, y, w, h) tight box),
    ordered by first pixel in scan order.
    """
    mask = np.asarray(mask, dtype=bool)
    nx, ny = mask.shape
    seen = np.zeros_like(mask)
    components = []
    for sx in range(nx):
        for sy in range(ny):
            if not mask[sx, sy] or seen[sx, sy]:
                continue
            pixels = []
            queue = deque([(sx, sy)])
            seen[sx, sy] = True
            while queue:
                x, y = queue.popleft()
                pixels.append((x, y))
                for dx in (-1, 0, 1):
                    for dy in (-1, 0, 1):
                        if dx == 0 and dy == 0:
                            continue
                        px, py = x + dx, y + dy
                        if 0 <= px < nx and 0 <= py < ny and mask[px, py] and not seen[px, py]:
                            seen[px, py] = True
                            queue.append((px, py))
            xs = [p[0] for p in pixels]
            ys = [p[1] for p in pixels]
            box = (min(xs), min(ys), max(xs) - min(xs) + 1, max(ys) - min(ys) + 1)
            components.append((frozenset(pixels), box))
    return components


def library_component_sets(pet_slice, threshold):
    """Pixel sets + boxes from the library's labeling, for oracle comparison."""
    from gazebench.proposal.components import label_components

    labels, count = label_components(np.asarray(pet_slice) >= threshold)
    out = []
    for label in range(1, count + 1):
        xs, ys = np.nonzero(labels == label)
        pixels = frozenset(zip(xs.tolist(), ys.tolist()))
        box = (
            int(xs.min()),
            int(ys.min()),
            int(xs.max() - xs.min() + 1),
            int(ys.max() - ys.min() + 1),
        )
        out.append((pixels, box))
    return out


def make_blob_slice(shape, blobs, background=0.0):
    """A slice with rectangular hot blobs: blobs = [(x, y, w, h, value)]."""
    plane = np.full(shape, background, dtype=np.float32)
    for x, y, w, h, value in blobs:
        plane[x : x + w, y : y + h] = value
    return plane


def phantom_512(spheres, nz=12, background=1.0, noise=0.0, seed=0, z_spacing=2.0):
    """A 512x512 in-plane phantom; sphere centers given as (x_px, y_px, slice, r_mm, peak).

    In-plane spacing is 1mm so image pixels equal millimetres.
    """
    from gazebench.volume import PhantomSpec, Sphere, generate_phantom

    spec = PhantomSpec(
        spheres=tuple(
            Sphere((float(x), float(y), float(s) * z_spacing), float(r), float(peak))
            for x, y, s, r, peak in spheres
        ),
        background_suv=background,
        dims=(512, 512, nz),
        spacing_mm=(1.0, 1.0, z_spacing),
        noise_sigma=noise,
        seed=seed,
    )
    return generate_phantom(spec)


def default_header(monitor=(2560, 1440), window_dim=(1024, 1024)):
    from gazebench.session import SessionHeader

    return SessionHeader(
        monitor_width=monitor[0],
        monitor_height=monitor[1],
        display_window_dim=window_dim,
    )


class ScriptedRead:
    """Drives a WorkbenchSession with a monotonic 60Hz clock."""

    TICK_US = 16667

    def __init__(self, pet, ct=None, header=None, policy=None, start_ts=1_000_000):
        from gazebench.proposal import ProposalPolicy
        from gazebench.session import WorkbenchSession

        header = header or default_header()
        policy = policy or ProposalPolicy()
        self.session = WorkbenchSession(pet, ct, header, policy=policy)
        self.ts = start_ts

    def ticks_at_image(self, image_xy, n=1):
        from gazebench.session.simulate import sample_at_image_point

        for _ in range(n):
            display = self.session.current_display_sample()
            self.session.ingest_gaze(
                sample_at_image_point(self.ts, image_xy, display)
            )
            self.ts += self.TICK_US
        return self

    def ticks_invalid(self, n=1):
        from gazebench.session.simulate import invalid_sample

        for _ in range(n):
            self.session.ingest_gaze(invalid_sample(self.ts))
            self.ts += self.TICK_US
        return self

    def key(self, key):
        code = ord(key) if isinstance(key, str) else int(key)
        self.session.handle_key(code, self.ts)
        self.ts += 1000
        return self

    def set_threshold(self, norm_max):
        self.session.set_view(norm=(0.0, float(norm_max)))
        return self

    def goto_slice(self, slice_number):
        self.session.set_view(slice_number=slice_number)
        return self

    def annotate_at(self, image_xy, slice_number, select="s", n_ticks=4, resize=()):
        """Scroll, fixate, select, optionally resize, accept."""
        self.goto_slice(slice_number)
        self.ticks_at_image(image_xy, n=n_ticks)
        self.key(select)
        for step in resize:
            self.key(step)
        self.key("a")
        return self

    def finish(self, save=True):
        return self.session.close(save)
