'''Reproducible sample points away from the non-invertibility locus.'''

import random


def sample_points(shape, count, seed, floor=0.5, box=2.0):
    '''Draw count points with every leading coordinate at least floor.

    Coordinates are uniform in [-box, box]; the first coordinate of
    each block gets a random sign and a magnitude in [floor, box], so
    the field stays invertible and jet checks stay well conditioned.
    Deterministic for a fixed seed.
    '''
    if floor <= 0 or floor >= box:
        raise ValueError('floor must lie strictly between 0 and box')
    rng = random.Random(seed)
    leads = {shape.flat(alpha, 1) for alpha, _ in shape.blocks()}
    points = []
    for _ in range(count):
        p = []
        for i in range(1, shape.n + 1):
            if i in leads:
                sign = 1.0 if rng.random() < 0.5 else -1.0
                p.append(sign * rng.uniform(floor, box))
            else:
                p.append(rng.uniform(-box, box))
        points.append(tuple(p))
    return points
