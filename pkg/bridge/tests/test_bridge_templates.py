import pytest

from fpwt_bridge import MappingError, make_template
from fpwt_bridge.templates import (
    resnet_cifar_template,
    resnet_imagenet_template,
    vgg_chain,
    vgg_template,
)


def by_name(template):
    return {layer["name"]: layer for layer in template.layers}


def test_vgg16_feature_indexing_and_spatial():
    template = vgg_template(16)
    names = [l["name"] for l in template.layers if l["kind"] == "conv"]
    assert names == [f"features.{i}" for i in
                     (0, 2, 5, 7, 10, 12, 14, 17, 19, 21, 24, 26, 28)]
    layers = by_name(template)
    assert layers["features.0"]["out_h"] == 224
    assert layers["features.5"]["out_h"] == 112
    assert layers["features.28"]["out_h"] == 14
    # three-linear head fed after the final 2x downsample
    assert layers["classifier.0"]["n_in"] == 512 * 7 * 7
    assert layers["classifier.6"]["n_out"] == 1000
    assert template.conv_bias


def test_chain_template_matches_explicit_plan():
    template = vgg_chain((8, "M", 16), resolution=32, num_classes=10,
                         hidden=(), name="chain")
    layers = by_name(template)
    assert layers["features.0"]["n_out"] == 8
    assert layers["features.3"]["name"] == "features.3"
    assert layers["features.3"]["n_in"] == 8
    assert layers["features.3"]["out_h"] == 16
    assert layers["classifier"]["n_in"] == 16 * 16 * 16
    assert layers["classifier"]["n_out"] == 10


def test_cifar_resnet_block_structure():
    template = resnet_cifar_template(20)
    layers = by_name(template)
    assert layers["conv1"]["n_out"] == 16
    assert layers["layer2.0.conv1"]["stride"] == 2
    assert layers["layer2.0.downsample.0"]["kernel_h"] == 1
    assert layers["layer2.0.downsample.0"]["out_h"] == 16
    add = layers["layer2.0.add"]
    assert add["predecessors"] == ["layer2.0.bn2", "layer2.0.downsample.1"]
    assert layers["fc"]["n_in"] == 64
    # identity-shortcut block has no downsample branch
    assert "layer1.0.downsample.0" not in layers
    assert layers["layer1.0.add"]["predecessors"][1] == "bn1"


def test_imagenet_resnet50_bottleneck_widths():
    template = resnet_imagenet_template(50)
    layers = by_name(template)
    assert layers["conv1"]["kernel_h"] == 7
    assert layers["conv1"]["out_h"] == 112
    # stem max pool halves the map before stage one
    assert layers["layer1.0.conv1"]["out_h"] == 56
    assert layers["layer1.0.conv3"]["n_out"] == 256
    assert layers["layer4.2.conv3"]["n_out"] == 2048
    assert layers["fc"]["n_in"] == 2048


def test_parameter_order_lists_bn_buffers():
    template = resnet_cifar_template(8)
    floats = dict(template.float_parameters())
    assert "conv1.weight" in floats
    assert "conv1.bias" not in floats
    assert "bn1.running_var" in floats
    assert "fc.bias" in floats
    ints = template.int_buffers()
    assert "bn1.num_batches_tracked" in ints
    assert all(name.endswith("num_batches_tracked") for name in ints)


def test_make_template_parses_specs():
    assert make_template("vgg11").name == "vgg11"
    assert make_template("resnet20").layers[-1]["n_out"] == 10
    assert make_template("resnet18").layers[-1]["n_out"] == 1000
    chain = make_template("chain:8,M,16", resolution=32, num_classes=10)
    assert chain.layers[-1]["n_out"] == 10
    with pytest.raises(MappingError):
        make_template("vgg15")
    with pytest.raises(MappingError):
        make_template("resnet21")
    with pytest.raises(MappingError):
        make_template("alexnet")
