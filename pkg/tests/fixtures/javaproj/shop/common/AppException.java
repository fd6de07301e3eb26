package shop.common;

public class AppException extends RuntimeException {
    final String code;

    public AppException(String code, String message) {
        super(message);
        this.code = code;
    }

    public String code() {
        return code;
    }
}
