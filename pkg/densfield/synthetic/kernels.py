"""numba kernels behind the ground truth oracles

Scenes are passed as flat arrays: boxes (n, 6) min/max corners, spheres (n, 4) center/radius, plus albedo arrays of
shape (n, 3). Below ground means y >= ground_height.
"""
import numba
import numpy as np

_EMPTY = (np.inf, -np.inf)


@numba.njit
def _material(x, y, z, boxes, spheres, ground_height):
    """0 for empty space, 1 + i for box i, 1 + n_boxes + j for sphere j, -1 for ground"""
    for i in range(boxes.shape[0]):
        if boxes[i, 0] <= x <= boxes[i, 3] and boxes[i, 1] <= y <= boxes[i, 4] and boxes[i, 2] <= z <= boxes[i, 5]:
            return 1 + i
    for j in range(spheres.shape[0]):
        dx = x - spheres[j, 0]
        dy = y - spheres[j, 1]
        dz = z - spheres[j, 2]
        if dx * dx + dy * dy + dz * dz <= spheres[j, 3] * spheres[j, 3]:
            return 1 + boxes.shape[0] + j
    if y >= ground_height:
        return -1
    return 0


@numba.njit(parallel=True)
def density_kernel(points, boxes, spheres, ground_height, sigma_solid):
    n = points.shape[0]
    out = np.zeros(n)
    for i in numba.prange(n):
        if _material(points[i, 0], points[i, 1], points[i, 2], boxes, spheres, ground_height) != 0:
            out[i] = sigma_solid
    return out


@numba.njit
def _albedo(material, box_albedo, sphere_albedo, ground_albedo):
    if material < 0:
        return ground_albedo
    if material <= box_albedo.shape[0]:
        return box_albedo[material - 1]
    return sphere_albedo[material - 1 - box_albedo.shape[0]]


@numba.njit(parallel=True)
def march_kernel(origins, directions, boxes, box_albedo, spheres, sphere_albedo, ground_height, ground_albedo,
                 sigma_solid, step, far):
    """Fixed step midpoint marching, returns colors (n, 3), expected distance (n,) and opacity (n,)"""
    n = origins.shape[0]
    colors = np.zeros((n, 3))
    depths = np.zeros(n)
    opacity = np.zeros(n)
    alpha = 1.0 - np.exp(-sigma_solid * step)
    n_steps = int(np.ceil(far / step))
    for i in numba.prange(n):
        transmittance = 1.0
        for k in range(n_steps):
            t = (k + 0.5) * step
            material = _material(origins[i, 0] + t * directions[i, 0], origins[i, 1] + t * directions[i, 1],
                                 origins[i, 2] + t * directions[i, 2], boxes, spheres, ground_height)
            if material != 0:
                weight = transmittance * alpha
                albedo = _albedo(material, box_albedo, sphere_albedo, ground_albedo)
                for c in range(3):
                    colors[i, c] += weight * albedo[c]
                depths[i] += weight * t
                transmittance *= 1.0 - alpha
                if transmittance < 1e-9:
                    break
        opacity[i] = 1.0 - transmittance
    return colors, depths, opacity


@numba.njit
def _box_interval(ox, oy, oz, dx, dy, dz, box):
    low = -np.inf
    high = np.inf
    origin = (ox, oy, oz)
    direction = (dx, dy, dz)
    for axis in range(3):
        if direction[axis] == 0.0:
            if origin[axis] < box[axis] or origin[axis] > box[axis + 3]:
                return _EMPTY
        else:
            t0 = (box[axis] - origin[axis]) / direction[axis]
            t1 = (box[axis + 3] - origin[axis]) / direction[axis]
            if t0 > t1:
                t0, t1 = t1, t0
            low = max(low, t0)
            high = min(high, t1)
    if low > high:
        return _EMPTY
    return low, high


@numba.njit
def _sphere_interval(ox, oy, oz, dx, dy, dz, sphere):
    fx = ox - sphere[0]
    fy = oy - sphere[1]
    fz = oz - sphere[2]
    half_b = fx * dx + fy * dy + fz * dz
    c = fx * fx + fy * fy + fz * fz - sphere[3] * sphere[3]
    discriminant = half_b * half_b - c
    if discriminant < 0.0:
        return _EMPTY
    root = np.sqrt(discriminant)
    return -half_b - root, -half_b + root


@numba.njit
def _ground_interval(oy, dy, ground_height):
    if dy == 0.0:
        if oy >= ground_height:
            return -np.inf, np.inf
        return _EMPTY
    crossing = (ground_height - oy) / dy
    if dy > 0.0:
        return crossing, np.inf
    return -np.inf, crossing


@numba.njit(parallel=True)
def solid_length_kernel(origins, targets, boxes, spheres, ground_height):
    """Length of the union of solid intervals on each segment origin -> target"""
    n = origins.shape[0]
    n_intervals = boxes.shape[0] + spheres.shape[0] + 1
    out = np.zeros(n)
    for i in numba.prange(n):
        ox, oy, oz = origins[i, 0], origins[i, 1], origins[i, 2]
        vx, vy, vz = targets[i, 0] - ox, targets[i, 1] - oy, targets[i, 2] - oz
        length = np.sqrt(vx * vx + vy * vy + vz * vz)
        scale = 1.0 / length if length > 0.0 else 0.0
        dx, dy, dz = vx * scale, vy * scale, vz * scale
        starts = np.empty(n_intervals)
        ends = np.empty(n_intervals)
        count = 0
        for b in range(boxes.shape[0]):
            low, high = _box_interval(ox, oy, oz, dx, dy, dz, boxes[b])
            low, high = max(low, 0.0), min(high, length)
            if low < high:
                starts[count] = low
                ends[count] = high
                count += 1
        for s in range(spheres.shape[0]):
            low, high = _sphere_interval(ox, oy, oz, dx, dy, dz, spheres[s])
            low, high = max(low, 0.0), min(high, length)
            if low < high:
                starts[count] = low
                ends[count] = high
                count += 1
        low, high = _ground_interval(oy, dy, ground_height)
        low, high = max(low, 0.0), min(high, length)
        if low < high:
            starts[count] = low
            ends[count] = high
            count += 1
        order = np.argsort(starts[:count])
        total = 0.0
        current_start = -1.0
        current_end = -1.0
        for k in range(count):
            start = starts[order[k]]
            end = ends[order[k]]
            if start > current_end:
                if current_end > current_start:
                    total += current_end - current_start
                current_start = start
                current_end = end
            elif end > current_end:
                current_end = end
        if current_end > current_start:
            total += current_end - current_start
        out[i] = total
    return out
