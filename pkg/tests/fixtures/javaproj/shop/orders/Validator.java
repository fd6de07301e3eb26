package shop.orders;

import shop.common.Result;

public class Validator {
    public Result validate(Order order) {
        if (order.id() == null) {
            return Result.failure("missing id");
        }
        if (order.total().cents() < 0) {
            return Result.failure("negative total");
        }
        return Result.success();
    }
}
