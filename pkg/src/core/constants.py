# Constants for better maintainability
class Constants:
    DOMAIN_X = "X"
    DOMAIN_Y = "Y"

    NET_G_X = "G_X"
    NET_G_Y = "G_Y"
    NET_D_X = "D_X"
    NET_D_Y = "D_Y"
    NET_P_X = "P_X"
    NET_P_Y = "P_Y"
    GENERATOR_NETS = (NET_G_X, NET_G_Y, NET_P_X, NET_P_Y)
    DISCRIMINATOR_NETS = (NET_D_X, NET_D_Y)
    ALL_NETS = (NET_G_X, NET_G_Y, NET_D_X, NET_D_Y, NET_P_X, NET_P_Y)

    CLASS_BACKGROUND = 0
    CLASS_OBJECT = 1
    CLASS_SHADOW = 2
    N_CLASSES = 3

    TASK_IMAGE2IMAGE = "image2image"
    TASK_IMAGE2LABELS = "image2labels"

    LOSS_CYCLE = "cycle"
    LOSS_RECYCLE = "recycle"
    LOSS_COMBINED = "combined"

    ADV_LEAST_SQUARES = "least_squares"
    ADV_LOG = "log"

    CONDITIONS = ("day", "sunset", "rain", "snow", "night")

    # numerical floors
    LOG_EPS = 1e-7
    NORM_EPS = 1e-5
    ADAM_EPS = 1e-8
    DISPERSION_EPS = 1e-12

    CHECKPOINT_MAGIC = b"RGAN"
    CHECKPOINT_VERSION = 1

    FRAME_PATTERN = "frame_{:06d}.ppm"
    LABEL_PATTERN = "label_{:06d}.pgm"
    MANIFEST_NAME = "manifest.txt"
    SIDECAR_NAME = "generated.txt"

    EXIT_OK = 0
    EXIT_VALIDATION = 1
    EXIT_NUMERICAL = 2
