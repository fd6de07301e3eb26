package shop.common;

public class Result {
    boolean ok;
    String message;

    public static Result success() {
        return new Result();
    }

    public static Result failure(String message) {
        Result r = new Result();
        r.message = message;
        return r;
    }

    public boolean isOk() {
        return ok;
    }
}
