from splinet.training.losses import LOSS_KINDS, get_loss, loss_averaged_mse, loss_softmax_xent, regularizer
