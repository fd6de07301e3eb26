package shop.catalog;

import java.util.HashMap;
import java.util.Map;
import shop.common.Result;

public class Inventory {
    Map<String, Integer> stock = new HashMap<String, Integer>();

    public Result reserve(Product product, int quantity) {
        Integer have = stock.get(product.id());
        if (have == null || have.intValue() < quantity) {
            return Result.failure("out of stock");
        }
        stock.put(product.id(), Integer.valueOf(have.intValue() - quantity));
        return Result.success();
    }

    public void restock(Product product, int quantity) {
        Integer have = stock.get(product.id());
        int base = have == null ? 0 : have.intValue();
        stock.put(product.id(), Integer.valueOf(base + quantity));
    }
}
